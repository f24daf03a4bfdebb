"""Numerical laboratory for semilinear wave equations with scale-invariant
damping and mass: critical exponents, hypergeometric kernels for the 1D
variable-speed wave equation, and a blow-up simulator."""

__version__ = "0.1.0"
