"""Spectral theory of the Lame operator -d^2/dx^2 + n(n+1) wp(x).

Subpackage map:

- ``elliptic``: Weierstrass functions and lattice constants for periods (1, tau)
- ``spectral``: the even doubly-periodic product-equation solution and the
  spectral polynomial Q(E)
- ``contours``: branch-tracked contour integrals of P(E)/sqrt(-Q(E)) and
  Weierstrass-form elliptic integrals
- ``monodromy``: Floquet multipliers by three independent routes, spectral
  classification
- ``ansatz``: Bethe-root and Hermite-Krichever representations of solutions
- ``reduction``: numerical certification of hyperelliptic-to-elliptic
  reduction formulas, including Hermite's classical ones
- ``finitegap``: the odd-order commuting operator and band structure
- ``perturbation``: trigonometric-limit basis and eigenvalue series in the nome
- ``continuation``: analytic continuation of eigenvalues in the nome plane
- ``cli``: command-line front end
"""

from .elliptic import (
    EllipticContext,
    LatticePoint,
    compute_context,
    invert_wp,
    lattice_reduce,
    weier_eval,
    wp,
    wp_prime,
    wp_trig_eval,
    wp_trig_expansion,
    zeta,
    sigma,
)

__all__ = [
    "EllipticContext",
    "LatticePoint",
    "compute_context",
    "invert_wp",
    "lattice_reduce",
    "weier_eval",
    "wp",
    "wp_prime",
    "wp_trig_eval",
    "wp_trig_expansion",
    "zeta",
    "sigma",
]

__version__ = "0.1.0"
