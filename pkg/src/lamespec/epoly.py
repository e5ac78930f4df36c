"""Polynomials in the spectral variable E.

Energy polynomials are plain ``numpy.polynomial.Polynomial`` objects with
complex coefficients in ascending degree; this module adds the few helpers the
rest of the package needs (trimming, monic normalization, deterministic root
ordering).
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial import Polynomial

EnergyPolynomial = Polynomial


def epoly(coeffs) -> Polynomial:
    """Build a polynomial from ascending complex coefficients."""
    return Polynomial(np.asarray(coeffs, dtype=complex))


def trim(poly: Polynomial, rel_tol: float = 1e-12) -> Polynomial:
    """Drop trailing coefficients that are negligible next to the largest one."""
    c = np.asarray(poly.coef, dtype=complex)
    scale = np.max(np.abs(c)) if c.size else 0.0
    if scale == 0.0:
        return Polynomial([0.0 + 0.0j])
    keep = len(c)
    while keep > 1 and abs(c[keep - 1]) <= rel_tol * scale:
        keep -= 1
    return Polynomial(c[:keep])


def monic(poly: Polynomial, rel_tol: float = 1e-12) -> Polynomial:
    """Normalize the leading coefficient to one."""
    p = trim(poly, rel_tol)
    lead = p.coef[-1]
    if lead == 0:
        raise ZeroDivisionError("cannot normalize the zero polynomial")
    return Polynomial(p.coef / lead)


def sorted_roots(poly: Polynomial) -> np.ndarray:
    """Roots via the companion matrix, ordered by (real, imag) for determinism.

    Only exact trailing zeros are stripped: the degree of these polynomials is
    structural, and a monic leading 1 may be tiny next to low-order terms.
    """
    c = np.trim_zeros(np.asarray(poly.coef, dtype=complex), "b")
    r = Polynomial(c).roots()
    order = np.lexsort((r.imag, r.real))
    return r[order]


def coeff_close(p: Polynomial, q: Polynomial, rel_tol: float) -> bool:
    """Coefficient-wise comparison relative to the larger coefficient scale."""
    a = np.asarray(trim(p).coef, dtype=complex)
    b = np.asarray(trim(q).coef, dtype=complex)
    m = max(len(a), len(b))
    a = np.pad(a, (0, m - len(a)))
    b = np.pad(b, (0, m - len(b)))
    scale = max(np.max(np.abs(a)), np.max(np.abs(b)), 1.0)
    return bool(np.max(np.abs(a - b)) <= rel_tol * scale)
