"""Damped-wave kernels and Aw-Rascle-Zhang traffic-flow decay experiments.

The package is organised bottom-up:

- ``specfun``: modified Bessel functions with overflow-safe scaling
- ``kernel``: the fundamental kernel of the damped wave operator
- ``dwe``: kernel-based and finite-difference solvers for that operator
- ``arz``: model parameters, pressure laws and characteristic speeds
- ``linear``: the linearized system about a constant state
- ``nonlinear``: a characteristic upwind solver for the full system
- ``envelopes``: pointwise envelope functions and convolution checks
- ``straighten``: the near-identity map that freezes characteristic speeds
- ``harness``: configuration-driven experiments and the command line
"""

__version__ = "0.1.0"
