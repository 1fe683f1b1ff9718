"""Configuration-driven experiments and the command line."""
