"""Pointwise envelope functions and empirical checks of convolution bounds.

Two envelopes control solutions of damped wave problems:

``F(x, t) = (1+t)^{-gamma} int_{mu2 t}^{mu1 t} exp(-a y^2/(1+t)) w(x-y) dy``
    a Gaussian-weighted average of the weight ``w`` over the light cone, and

``G(x, t) = exp(-b t) sup_{|z| <= delta t} w(x - mu t + z)``
    an exponentially damped running maximum of ``w`` along the ray of speed
    ``mu``.

:func:`check_lemma` evaluates the left-hand sides of several space-time
convolution inequalities by nested quadrature and reports
``sup(left / right)`` over a grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Literal

import numpy as np
from scipy.integrate import trapezoid
from scipy.signal import fftconvolve

from .errors import DomainError, PreconditionError, UnsupportedOrderError
from .field import uniform_axis
from .kernel import DampedWaveCoeffs, kernel_v_deriv


@dataclass(frozen=True)
class Weight:
    """Non-negative weight sampled on a uniform grid; linear in between, zero outside."""

    x0: float
    dx: float
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if np.any(vals < 0) or not np.all(np.isfinite(vals)):
            raise DomainError("weights must be finite and non-negative")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, f: Callable[[np.ndarray], np.ndarray], lo: float, hi: float, dx: float) -> "Weight":
        x = uniform_axis(lo, hi, dx)
        return cls(float(x[0]), dx, np.abs(np.asarray(f(x), dtype=float)))

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.values.size)

    def __call__(self, z) -> np.ndarray:
        return np.interp(z, self.x, self.values, left=0.0, right=0.0)

    def l1(self) -> float:
        return float(trapezoid(self.values, dx=self.dx))

    def scaled(self, c: float) -> "Weight":
        return Weight(self.x0, self.dx, c * self.values)

    def shifted(self, s: float) -> "Weight":
        return Weight(self.x0 + s, self.dx, self.values)

    def on_grid(self, x: np.ndarray) -> np.ndarray:
        return self(x)


@dataclass(frozen=True)
class EnvelopeParams:
    a: float = 1.0
    gamma: float = 0.5
    b: float = 0.1
    delta: float = 0.0
    mu1: float = 1.0
    mu2: float = -1.0
    mu: float = 1.0
    w: Weight = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if not (self.a > 0 and self.b >= 0 and self.delta >= 0):
            raise DomainError("need a > 0, b >= 0, delta >= 0")
        if not (self.mu1 >= self.mu2):
            raise DomainError("need mu1 >= mu2")


def l_gamma(t, gamma: float):
    """``int_0^t (1+s)^{-gamma} ds`` in closed form."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("t must be non-negative")
    if gamma == 1.0:
        out = np.log1p(t)
    else:
        out = ((1.0 + t) ** (1.0 - gamma) - 1.0) / (1.0 - gamma)
    return float(out) if out.ndim == 0 else out


def envelope_f(x, t: float, p: EnvelopeParams) -> np.ndarray:
    """Gaussian cone envelope by trapezoid quadrature in ``y``.

    Node spacing is at most ``min(w.dx, sqrt((1+t)/a)/20)``.
    """
    if t < 0:
        raise DomainError("t must be non-negative")
    x = np.asarray(x, dtype=float)
    lo, hi = p.mu2 * t, p.mu1 * t
    if t == 0 or hi <= lo:
        return np.zeros_like(x)
    h = min(p.w.dx, math.sqrt((1 + t) / p.a) / 20)
    m = max(2, int(math.ceil((hi - lo) / h)))
    y = np.linspace(lo, hi, m + 1)
    qw = np.full(m + 1, (hi - lo) / m)
    qw[0] *= 0.5
    qw[-1] *= 0.5
    kern = np.exp(-p.a * y**2 / (1 + t)) * qw
    out = np.empty_like(x)
    flat = x.ravel()
    res = out.ravel()
    rows = max(1, 2_000_000 // y.size)
    for i in range(0, flat.size, rows):
        res[i:i + rows] = p.w(flat[i:i + rows, None] - y[None, :]) @ kern
    return out.reshape(x.shape) / (1 + t) ** p.gamma


def _range_max_table(vals: np.ndarray) -> list[np.ndarray]:
    # sparse table: level k holds max over windows of length 2^k
    table = [vals]
    k = 1
    while 2 ** k <= vals.size:
        prev = table[-1]
        half = 2 ** (k - 1)
        table.append(np.maximum(prev[:-half], prev[half:]))
        k += 1
    return table


def _windowed_max(x: np.ndarray, center_shift: float, half: float, w: Weight) -> np.ndarray:
    """Max of ``w`` over ``[x - shift - half, x - shift + half]``: samples plus both ends."""
    lo = x - center_shift - half
    hi = x - center_shift + half
    out = np.maximum(w(lo), w(hi))
    if half == 0 or w.values.size == 0:
        return out
    n = w.values.size
    i_lo = np.maximum(np.ceil((lo - w.x0) / w.dx - 1e-12).astype(int), 0)
    i_hi = np.minimum(np.floor((hi - w.x0) / w.dx + 1e-12).astype(int), n - 1)
    ok = i_lo <= i_hi
    if not np.any(ok):
        return out
    table = _range_max_table(w.values)
    lo_i, hi_i = i_lo[ok], i_hi[ok]
    lev = np.floor(np.log2(hi_i - lo_i + 1)).astype(int)
    res = np.empty(lo_i.size)
    for k in np.unique(lev):
        sel = lev == k
        tk = table[k]
        res[sel] = np.maximum(tk[lo_i[sel]], tk[hi_i[sel] - 2 ** k + 1])
    out[ok] = np.maximum(out[ok], res)
    return out


def envelope_g(x, t: float, p: EnvelopeParams, mu: float | None = None) -> np.ndarray:
    """Damped running maximum of ``w`` along the ray of speed ``mu`` (default ``p.mu``)."""
    if t < 0:
        raise DomainError("t must be non-negative")
    x = np.asarray(x, dtype=float)
    mu = p.mu if mu is None else mu
    flat = x.ravel()
    g = _windowed_max(flat, mu * t, p.delta * t, p.w)
    return (math.exp(-p.b * t) * g).reshape(x.shape)


# --- grid-aligned convolution used by the nested lemma integrals -------------

def segment_weights(lo: float, hi: float, dx: float):
    """Exact weights for ``int_lo^hi phi`` when ``phi`` is linear between multiples of ``dx``.

    Returns ``(j0, wts)`` with ``int ~= sum_k wts[k] * phi((j0 + k) dx)``.
    """
    if hi <= lo:
        return 0, np.zeros(0)
    k0 = int(math.floor(lo / dx))
    k1 = int(math.ceil(hi / dx))
    cells = np.arange(k0, k1)
    up = np.clip(lo / dx - cells, 0.0, 1.0)
    uq = np.clip(hi / dx - cells, 0.0, 1.0)
    left = dx * ((uq - up) - 0.5 * (uq**2 - up**2))
    right = dx * 0.5 * (uq**2 - up**2)
    wts = np.zeros(cells.size + 1)
    wts[:-1] += left
    wts[1:] += right
    return k0, wts


def cone_convolve(values: np.ndarray, dx: float, lo: float, hi: float,
                  kernel: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """``out[i] = int_lo^hi kernel(y) f(x_i - y) dy`` for ``f`` sampled on the grid.

    ``f`` is zero outside the sampled range.
    """
    j0, wts = segment_weights(lo, hi, dx)
    if wts.size == 0:
        return np.zeros_like(values)
    kv = wts * kernel(dx * (j0 + np.arange(wts.size)))
    full = fftconvolve(values, kv) if min(values.size, kv.size) > 64 else np.convolve(values, kv)
    n = values.size
    idx = np.arange(n) - j0
    out = np.zeros(n)
    ok = (idx >= 0) & (idx < full.size)
    out[ok] = full[idx[ok]]
    return out


def envelope_f_grid(w_grid: np.ndarray, dx: float, t: float, a: float, gamma: float,
                    mu1: float, mu2: float) -> np.ndarray:
    """``F`` on the same uniform grid as the sampled weight (grid-aligned quadrature)."""
    if t == 0:
        return np.zeros_like(w_grid)
    out = cone_convolve(w_grid, dx, mu2 * t, mu1 * t, lambda y: np.exp(-a * y**2 / (1 + t)))
    return out / (1 + t) ** gamma


def envelope_g_grid(x: np.ndarray, w: Weight, t: float, b: float, delta: float, mu: float) -> np.ndarray:
    p = EnvelopeParams(a=1.0, b=b, delta=delta, mu1=max(mu, 0.0), mu2=min(mu, 0.0), mu=mu, w=w)
    return envelope_g(x, t, p)


# --- lemma checks --------------------------------------------------------------

LemmaId = Literal["transport", "heat", "kernel_ray", "edge_ray", "L1_Linf"]


@dataclass(frozen=True)
class LemmaGrid:
    """Output window and step sizes for a lemma check."""

    x_min: float
    x_max: float
    dx: float
    t_max: float
    dt: float
    n_out: int = 21  # output times where the ratio is evaluated

    def halved(self) -> "LemmaGrid":
        return replace(self, dx=self.dx / 2, dt=self.dt / 2)

    @property
    def x(self) -> np.ndarray:
        return uniform_axis(self.x_min, self.x_max, self.dx)

    @property
    def s(self) -> np.ndarray:
        return uniform_axis(0.0, self.t_max, self.dt)

    def out_indices(self) -> np.ndarray:
        ns = len(self.s)
        idx = np.unique(np.round(np.linspace(0, ns - 1, self.n_out)).astype(int))
        return idx[idx > 0]


@dataclass
class LemmaReport:
    lemma: str
    constant: float
    argmax_x: float
    argmax_t: float
    extras: dict = field(default_factory=dict)
    grid: LemmaGrid | None = None


def _sup_ratio(left: np.ndarray, right: np.ndarray, x: np.ndarray, t: np.ndarray, rel_floor: float = 1e-10):
    """``sup left/right`` over points where the right side is not negligible.

    Points where both sides vanish are skipped; a left side that is
    non-negligible where the right side vanishes gives ``inf``.
    """
    scale = max(float(np.max(np.abs(right))), 1e-300)
    mask = right > rel_floor * scale
    lscale = max(float(np.max(np.abs(left))), 1e-300)
    if np.any((~mask) & (np.abs(left) > 1e-6 * lscale)):
        bad = np.argwhere((~mask) & (np.abs(left) > 1e-6 * lscale))[0]
        return math.inf, float(x[bad[0]]), float(t[bad[1]])
    if not np.any(mask):
        return 0.0, math.nan, math.nan
    ratio = np.where(mask, np.abs(left) / np.where(mask, right, 1.0), 0.0)
    i, j = np.unravel_index(int(np.argmax(ratio)), ratio.shape)
    return float(ratio[i, j]), float(x[i]), float(t[j])


def _trap_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n, h)
    if n >= 1:
        w[0] *= 0.5
        w[-1] *= 0.5
    if n == 1:
        w[:] = 0.0
    return w


def check_lemma(lemma_id: LemmaId, p: EnvelopeParams, aux: dict | None, grid: LemmaGrid) -> LemmaReport:
    """Empirical constant of a convolution inequality on ``grid``.

    ``aux`` carries lemma-specific inputs:

    - ``"transport"``: ``a1`` (rate of the exponential time kernel)
    - ``"heat"``: ``alpha``, ``a0``, and optionally ``log_factor`` (default true)
    - ``"kernel_ray"``: ``coeffs`` (kernel), ``k``, ``n``
    - ``"edge_ray"``: ``coeffs``, ``k``, ``n``, ``mu_prime`` (a cone edge speed)
    - ``"L1_Linf"``: nothing

    The weight ``p.w`` is resampled onto the grid with zero extension, so the
    grid must contain its support widened by the cone.
    """
    aux = dict(aux or {})
    lemma_id = str(lemma_id)
    x = grid.x
    s = grid.s
    wg = p.w(x)
    if lemma_id == "transport":
        rep = _check_transport(p, aux, grid, x, s, wg)
    elif lemma_id == "heat":
        rep = _check_heat(p, aux, grid, x, s, wg)
    elif lemma_id == "kernel_ray":
        rep = _check_kernel_ray(p, aux, grid, x, s, wg)
    elif lemma_id == "edge_ray":
        rep = _check_edge_ray(p, aux, grid, x, s, wg)
    elif lemma_id == "L1_Linf":
        rep = _l1_linf(p, grid, x, s, wg)
    else:
        raise ValueError(f"unknown lemma {lemma_id!r}")
    rep.grid = grid
    return rep


def _check_transport(p, aux, grid, x, s, wg):
    a1 = float(aux["a1"])
    mu = p.mu
    if not (p.mu2 <= mu <= p.mu1):
        raise PreconditionError(f"need mu2 <= mu <= mu1, got mu={mu}")
    if mu != 0 and p.a > a1 / (2 * mu * mu) * (1 + 1e-12):
        raise PreconditionError(f"need a <= a1/(2 mu^2) = {a1 / (2 * mu * mu)}, got a={p.a}")
    ftab = np.stack([envelope_f_grid(wg, grid.dx, si, p.a, p.gamma, p.mu1, p.mu2) for si in s])
    out = grid.out_indices()
    left = np.zeros((x.size, out.size))
    right = np.zeros_like(left)
    for col, n in enumerate(out):
        t = s[n]
        sw = _trap_weights(n + 1, grid.dt)
        acc = np.zeros_like(x)
        for m in range(n + 1):
            if sw[m] == 0:
                continue
            tau = t - s[m]
            acc += sw[m] * math.exp(-a1 * tau) * np.interp(x - mu * tau, x, ftab[m], left=0.0, right=0.0)
        left[:, col] = acc
        right[:, col] = ftab[n]
    K, ax, at = _sup_ratio(left, right, x, s[out])
    return LemmaReport("transport", K, ax, at, {"a1": a1, "mu": mu})


def _check_heat(p, aux, grid, x, s, wg):
    alpha = float(aux["alpha"])
    a0 = float(aux["a0"])
    beta = p.gamma
    log_factor = bool(aux.get("log_factor", True))
    if not (alpha > 0.5 and beta > 0.5):
        raise PreconditionError("need alpha > 1/2 and beta > 1/2")
    m1, m2 = p.mu1 + p.delta, p.mu2 - p.delta
    ftab = [envelope_f_grid(wg, grid.dx, si, p.a, beta, m1, m2) for si in s]
    out = grid.out_indices()
    left = np.zeros((x.size, out.size))
    right = np.zeros_like(left)

    def lg(t, g):
        if g == 1.0 and not log_factor:
            return 1.0
        return l_gamma(t, g)

    for col, n in enumerate(out):
        t = s[n]
        sw = _trap_weights(n + 1, grid.dt)
        acc = np.zeros_like(x)
        for m in range(n):
            tau = t - s[m]
            kern = lambda y, tau=tau: np.exp(-a0 * y**2 / (1 + tau)) / (1 + tau) ** alpha
            acc += sw[m] * cone_convolve(ftab[m], grid.dx, p.mu2 * tau, p.mu1 * tau, kern)
        left[:, col] = acc
        base = envelope_f_grid(wg, grid.dx, t, p.a, 0.0, m1, m2)
        right[:, col] = (lg(t, beta - 0.5) / (1 + t) ** alpha + lg(t, alpha - 0.5) / (1 + t) ** beta) * base
    K, ax, at = _sup_ratio(left, right, x, s[out])
    # ratio profile in time, useful for the logarithmic exception
    per_t = []
    for col in range(out.size):
        r = right[:, col]
        msk = r > 1e-10 * max(r.max(), 1e-300)
        per_t.append(float(np.max(left[msk, col] / r[msk])) if np.any(msk) else 0.0)
    return LemmaReport("heat", K, ax, at, {"alpha": alpha, "beta": beta, "a0": a0,
                                          "log_factor": log_factor,
                                          "t_out": s[out].tolist(), "ratio_t": per_t})


def _kernel_hyp(aux):
    coeffs: DampedWaveCoeffs = aux["coeffs"]
    k = int(aux.get("k", 0))
    n = int(aux.get("n", 0))
    if k + n > 2 or k < 0 or n < 0:
        raise UnsupportedOrderError(f"(k={k}, n={n}) not supported")
    return coeffs, k, n


def _check_kernel_ray(p, aux, grid, x, s, wg):
    coeffs, k, n = _kernel_hyp(aux)
    if not (abs(p.mu - coeffs.lambda1) < 1e-12 or abs(p.mu - coeffs.lambda2) < 1e-12):
        raise PreconditionError("need mu equal to one of the kernel speeds")
    wobj = Weight(float(x[0]), grid.dx, wg)
    gtab = [envelope_g_grid(x, wobj, si, p.b, p.delta, p.mu) for si in s]
    gamma = 0.5 + 0.5 * k + n
    m1, m2 = coeffs.lambda1 + p.delta, coeffs.lambda2 - p.delta
    out = grid.out_indices()
    left = np.zeros((x.size, out.size))
    right = np.zeros_like(left)
    for col, nn in enumerate(out):
        t = s[nn]
        sw = _trap_weights(nn + 1, grid.dt)
        acc = np.zeros_like(x)
        for m in range(nn):
            tau = t - s[m]
            kern = lambda y, tau=tau: np.abs(kernel_v_deriv(y, tau, k, n, coeffs))
            acc += sw[m] * cone_convolve(gtab[m], grid.dx, coeffs.lambda2 * tau, coeffs.lambda1 * tau, kern)
        left[:, col] = acc
        right[:, col] = envelope_f_grid(wg, grid.dx, t, p.a, gamma, m1, m2)
    K, ax, at = _sup_ratio(left, right, x, s[out])
    return LemmaReport("kernel_ray", K, ax, at, {"k": k, "n": n, "mu": p.mu})


def _check_edge_ray(p, aux, grid, x, s, wg):
    coeffs, k, n = _kernel_hyp(aux)
    mu_p = float(aux.get("mu_prime", coeffs.lambda1))
    if not (abs(mu_p - coeffs.lambda1) < 1e-12 or abs(mu_p - coeffs.lambda2) < 1e-12):
        raise PreconditionError("need mu_prime equal to one of the kernel speeds")
    if not p.b < coeffs.a0:
        raise PreconditionError(f"need b < a0 = {coeffs.a0}, got b={p.b}")
    if not p.delta < 0.5 * min(coeffs.lambda1, abs(coeffs.lambda2)):
        raise PreconditionError("need delta < min(lambda1, |lambda2|)/2")
    wobj = Weight(float(x[0]), grid.dx, wg)
    gamma = 0.5 + 0.5 * k + n
    m1, m2 = coeffs.lambda1 + p.delta, coeffs.lambda2 - p.delta
    out = grid.out_indices()
    left = np.zeros((x.size, out.size))
    right = np.zeros_like(left)
    for col, nn in enumerate(out):
        t = s[nn]
        sw = _trap_weights(nn + 1, grid.dt)
        acc = np.zeros_like(x)
        for m in range(nn + 1):
            if sw[m] == 0:
                continue
            tau = t - s[m]
            dv = abs(kernel_v_deriv(mu_p * tau, tau, k, n, coeffs))
            acc += sw[m] * dv * envelope_g_grid(x - mu_p * tau, wobj, s[m], p.b, p.delta, p.mu)
        left[:, col] = acc
        right[:, col] = (envelope_g_grid(x, wobj, t, p.b, p.delta, mu_p)
                         + envelope_f_grid(wg, grid.dx, t, p.a, gamma, m1, m2))
    K, ax, at = _sup_ratio(left, right, x, s[out])
    return LemmaReport("edge_ray", K, ax, at, {"k": k, "n": n, "mu": p.mu, "mu_prime": mu_p})


def _l1_linf(p, grid, x, s, wg):
    wl1 = float(np.sum(wg) * grid.dx)
    if wl1 == 0:
        return LemmaReport("L1_Linf", 0.0, math.nan, math.nan, {})
    best = (0.0, math.nan)
    linf = 0.0
    for n in grid.out_indices():
        t = s[n]
        f = envelope_f_grid(wg, grid.dx, t, p.a, p.gamma, p.mu1, p.mu2)
        r1 = float(np.sum(f) * grid.dx) * (1 + t) ** (p.gamma - 0.5) / wl1
        linf = max(linf, float(f.max()) * (1 + t) ** p.gamma / wl1)
        if r1 > best[0]:
            best = (r1, t)
    return LemmaReport("L1_Linf", best[0], math.nan, best[1],
                       {"linf_ratio": linf, "gaussian_limit": math.sqrt(math.pi / p.a)})
