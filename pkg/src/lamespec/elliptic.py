"""Weierstrass elliptic functions for the period lattice (1, tau).

Everything is evaluated through Jacobi theta q-series in the nome
``p = exp(i*pi*tau)`` after reducing the argument to the centered fundamental
cell, which keeps the series terms decaying like ``|p|**(k**2 - 1/4)`` and
makes double precision reachable for any ``|p| <= 0.95``.

Conventions (half-periods 1/2 and tau/2):

    sigma(z) = exp(eta1 z^2) theta1(pi z) / (pi theta1'(0))
    zeta(z)  = 2 eta1 z + pi theta1'(pi z)/theta1(pi z)
    wp(z)    = -2 eta1 - pi^2 (log theta1)''(pi z)
    wp'(z)   = -pi^3 (log theta1)'''(pi z)

    e1 = (pi^2/3)(theta2^4 + 2 theta4^4)     at z = 1/2
    e2 = (pi^2/3)(theta2^4 - theta4^4)       at z = (1+tau)/2
    e3 = -(pi^2/3)(2 theta2^4 + theta4^4)    at z = tau/2

with the theta constants taken at zero argument and nome p.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DomainError, NoConvergenceError, PoleError, PrecisionError

_TERM_FLOOR = 1e-17
_MAX_NOME = 0.95


@dataclass(frozen=True)
class EllipticContext:
    """Immutable bundle of lattice constants for periods (1, tau).

    All evaluations are pure functions of the context, so a context may be
    shared freely between threads.
    """

    tau: complex
    p: complex
    truncation_terms: int
    e1: complex
    e2: complex
    e3: complex
    g2: complex
    g3: complex
    eta1: complex
    eta3: complex
    half_periods: tuple
    # precomputed theta machinery (not part of the public contract)
    _n_terms: int = field(repr=False, default=0)
    _odd: np.ndarray = field(repr=False, default=None)
    _c0: np.ndarray = field(repr=False, default=None)
    _t1p0: complex = field(repr=False, default=0j)


def _terms_needed(abs_p: float, requested: int) -> int:
    # terms decay like |p|**((k+1/2)^2 - 1/4) after argument reduction
    if abs_p <= 1e-8:
        return max(requested, 8)
    need = 0.25 - 17.0 * math.log(10.0) / math.log(abs_p)
    return max(requested, int(math.ceil(math.sqrt(need) - 0.5)) + 3)


def compute_context(tau: complex, truncation_terms: int = 24) -> EllipticContext:
    """Build the lattice constants from theta-constant q-series.

    Raises ``DomainError`` for Im(tau) <= 0 and ``PrecisionError`` when the
    nome is too close to the unit circle for double precision (|p| > 0.95).
    """
    tau = complex(tau)
    if tau.imag <= 0:
        raise DomainError(f"Im(tau) must be positive, got tau={tau}")
    if truncation_terms < 8:
        raise DomainError("truncation_terms must be at least 8")
    p = np.exp(1j * np.pi * tau)
    abs_p = abs(p)
    if abs_p > _MAX_NOME:
        raise PrecisionError(
            f"|p|={abs_p:.4f} too close to 1 for double precision "
            f"(limit {_MAX_NOME})",
            achieved=abs_p ** (truncation_terms**2),
        )
    n_terms = _terms_needed(abs_p, truncation_terms)

    k = np.arange(n_terms)
    odd = 2 * k + 1
    sign = (-1.0) ** k
    q_odd = p ** ((k + 0.5) ** 2)
    q_sq = p ** ((k + 1.0) ** 2)

    th2 = 2.0 * np.sum(q_odd)
    th4 = 1.0 + 2.0 * np.sum((-1.0) ** (k + 1) * q_sq)
    t1p0 = 2.0 * np.sum(sign * odd * q_odd)
    t1ppp0 = -2.0 * np.sum(sign * odd**3 * q_odd)
    eta1 = -np.pi**2 * t1ppp0 / (6.0 * t1p0)

    pi2_3 = np.pi**2 / 3.0
    e1 = pi2_3 * (th2**4 + 2.0 * th4**4)
    e2 = pi2_3 * (th2**4 - th4**4)
    e3 = -pi2_3 * (2.0 * th2**4 + th4**4)
    g2 = -4.0 * (e1 * e2 + e2 * e3 + e3 * e1)
    g3 = 4.0 * e1 * e2 * e3

    ctx = EllipticContext(
        tau=tau,
        p=complex(p),
        truncation_terms=truncation_terms,
        e1=complex(e1),
        e2=complex(e2),
        e3=complex(e3),
        g2=complex(g2),
        g3=complex(g3),
        eta1=complex(eta1),
        eta3=0j,  # filled below through zeta(tau/2)
        half_periods=(0j, 0.5 + 0j, -(tau + 1) / 2.0, tau / 2.0),
        _n_terms=n_terms,
        _odd=odd.astype(float),
        _c0=2.0 * sign * q_odd,
        _t1p0=complex(t1p0),
    )
    t0, t1, _, _ = _theta1_stack(ctx, np.pi * tau / 2.0)
    eta3 = 2.0 * eta1 * (tau / 2.0) + np.pi * t1 / t0
    object.__setattr__(ctx, "eta3", complex(eta3))

    _check_context(ctx)
    return ctx


def _check_context(ctx: EllipticContext) -> None:
    scale = max(abs(ctx.e1), abs(ctx.e3), 1.0)
    esum = abs(ctx.e1 + ctx.e2 + ctx.e3)
    legendre = abs(ctx.eta1 * ctx.tau / 2.0 - ctx.eta3 / 2.0 - 1j * np.pi / 2.0)
    if esum > 1e-12 * scale or legendre > 1e-12:
        raise PrecisionError(
            "lattice constants failed their identities "
            f"(e-sum {esum:.2e}, Legendre {legendre:.2e})",
            achieved=max(esum / scale, legendre),
        )


@dataclass(frozen=True)
class LatticePoint:
    """An argument split as x = reduced + m + n*tau with reduced in the cell."""

    x: complex
    reduced: complex
    m: int
    n: int


def _split(tau: complex, z, centered: bool):
    z = np.asarray(z, dtype=complex)
    t = z.imag / tau.imag
    s = z.real - t * tau.real
    if centered:
        n = np.round(t)
        m = np.round(s)
    else:
        n = np.floor(t)
        m = np.floor(s)
    return z - m - n * tau, m, n


def lattice_reduce(ctx: EllipticContext, x: complex) -> LatticePoint:
    """Representative in the fundamental parallelogram, half-open on two sides."""
    red, m, n = _split(ctx.tau, complex(x), centered=False)
    return LatticePoint(x=complex(x), reduced=complex(red), m=int(m), n=int(n))


def reduce_cell(ctx: EllipticContext, x: complex) -> complex:
    """Shift x by the lattice into [0,1) + [0,1)*tau."""
    return lattice_reduce(ctx, x).reduced


def _theta1_stack(ctx: EllipticContext, v):
    """theta1 and its first three v-derivatives at v (array-capable).

    Each series term is formed as a single exponential so that the nome power
    and the sin/cos growth can never overflow separately; after argument
    reduction every exponent has modulus at most |p|**(k^2 - 1/4) times a
    bounded factor.
    """
    v = np.asarray(v, dtype=complex)
    kk = ctx._odd
    k = (kk - 1.0) / 2.0
    sign = (-1.0) ** k
    base = 1j * np.pi * ctx.tau * (k + 0.5) ** 2
    phase = 1j * np.multiply.outer(v, kk)
    ea = np.exp(base + phase)
    eb = np.exp(base - phase)
    # theta1^{(j)}(v) = sum sign * (-i) * [(i kk)^j ea - (-i kk)^j eb]
    t0 = (ea - eb) @ (-1j * sign)
    t1 = (ea + eb) @ (sign * kk)
    t2 = (ea - eb) @ (1j * sign * kk**2)
    t3 = -((ea + eb) @ (sign * kk**3))
    return t0, t1, t2, t3


def _reduced_or_pole(ctx, x, name):
    z = np.asarray(x, dtype=complex)
    z0, m, n = _split(ctx.tau, z, centered=True)
    bad = np.abs(z0) <= 1e-14 * np.maximum(1.0, np.abs(z))
    if np.any(bad):
        where = z[bad].flat[0] if z.shape else complex(z)
        raise PoleError(
            f"{name} has a pole at the lattice point {where}",
            lattice_point=complex(where),
        )
    return z0, m, n


def wp(ctx: EllipticContext, x):
    """Weierstrass p-function; accepts scalars or arrays."""
    z0, _, _ = _reduced_or_pole(ctx, x, "wp")
    t0, t1, t2, _ = _theta1_stack(ctx, np.pi * z0)
    r = t1 / t0
    val = -2.0 * ctx.eta1 - np.pi**2 * (t2 / t0 - r * r)
    return val if np.ndim(x) else complex(val)


def wp_prime(ctx: EllipticContext, x):
    """Derivative of the p-function."""
    z0, _, _ = _reduced_or_pole(ctx, x, "wp_prime")
    t0, t1, t2, t3 = _theta1_stack(ctx, np.pi * z0)
    r = t1 / t0
    log3 = t3 / t0 - 3.0 * t2 * t1 / t0**2 + 2.0 * r**3
    val = -np.pi**3 * log3
    return val if np.ndim(x) else complex(val)


def zeta(ctx: EllipticContext, x):
    """Weierstrass zeta function (quasi-periodic: picks up 2 eta per period)."""
    z0, m, n = _reduced_or_pole(ctx, x, "zeta")
    t0, t1, _, _ = _theta1_stack(ctx, np.pi * z0)
    val = 2.0 * ctx.eta1 * z0 + np.pi * t1 / t0 + 2.0 * m * ctx.eta1 + 2.0 * n * ctx.eta3
    return val if np.ndim(x) else complex(val)


def sigma(ctx: EllipticContext, x):
    """Weierstrass sigma function (entire, odd)."""
    z = np.asarray(x, dtype=complex)
    z0, m, n = _split(ctx.tau, z, centered=True)
    t0, _, _, _ = _theta1_stack(ctx, np.pi * z0)
    base = np.exp(ctx.eta1 * z0**2) * t0 / (np.pi * ctx._t1p0)
    shift = m + n * ctx.tau
    fac = (-1.0) ** (m + n + m * n) * np.exp(
        (2.0 * m * ctx.eta1 + 2.0 * n * ctx.eta3) * (z0 + shift / 2.0)
    )
    val = base * fac
    return val if np.ndim(x) else complex(val)


_WEIER_FUNCS = {"wp": wp, "wp_prime": wp_prime, "zeta": zeta, "sigma": sigma}


def weier_eval(ctx: EllipticContext, x, which: str):
    """Evaluate one of wp, wp_prime, zeta, sigma at x."""
    try:
        f = _WEIER_FUNCS[which]
    except KeyError:
        raise DomainError(
            f"unknown function {which!r}; expected one of {sorted(_WEIER_FUNCS)}"
        ) from None
    return f(ctx, x)


class WpInverse(NamedTuple):
    alpha: complex
    zeta_alpha: complex


def _newton_wp(ctx, xi, seed, tol):
    a = complex(seed)
    step_cap = 0.25 * min(1.0, ctx.tau.imag)
    for _ in range(60):
        try:
            f = wp(ctx, a) - xi
        except PoleError:
            return None
        if abs(f) <= tol:
            return a
        try:
            d = wp_prime(ctx, a)
        except PoleError:
            return None
        if d == 0:
            return None
        step = -f / d
        if abs(step) > step_cap:
            step *= step_cap / abs(step)
        a = a + step
    try:
        if abs(wp(ctx, a) - xi) <= tol:
            return a
    except PoleError:
        pass
    return None


def invert_wp(ctx: EllipticContext, xi: complex, sign_hint: str = "+") -> WpInverse:
    """Solve wp(alpha) = xi for alpha in the fundamental cell.

    ``sign_hint`` selects between the two solutions +-alpha (mod lattice):
    '+' returns the branch with wp'(alpha) equal to the principal square root
    of 4 xi^3 - g2 xi - g3, '-' the opposite one.
    """
    if sign_hint not in ("+", "-"):
        raise DomainError("sign_hint must be '+' or '-'")
    xi = complex(xi)
    tol = 1e-11 * max(1.0, abs(xi))

    seeds = []
    scale = max(abs(ctx.e1), abs(ctx.e2), abs(ctx.e3))
    if abs(xi) > 3.0 * scale:
        root = 1.0 / np.sqrt(xi)
        seeds.extend([complex(root), complex(-root)])
    grid = np.arange(1, 16) / 16.0
    aa, bb = np.meshgrid(grid, grid)
    pts = (aa + bb * ctx.tau).ravel()
    vals = wp(ctx, pts)
    order = np.argsort(np.abs(vals - xi))
    seeds.extend(pts[order[:8]].tolist())

    alpha = None
    for seed in seeds:
        alpha = _newton_wp(ctx, xi, seed, tol)
        if alpha is not None:
            break
    if alpha is None:
        raise NoConvergenceError(f"wp inversion failed for xi={xi}")

    # Near a half-period value xi ~ e_k the root of wp - xi is (almost) double
    # and plain Newton stalls at sqrt-tolerance; polish on the simple zero of
    # wp' instead.
    cubic = 4.0 * xi**3 - ctx.g2 * xi - ctx.g3
    if abs(cubic) < 1e-6 * max(1.0, abs(xi)) ** 3:
        for _ in range(8):
            d1 = wp_prime(ctx, alpha)
            d2 = 6.0 * wp(ctx, alpha) ** 2 - ctx.g2 / 2.0
            if d2 == 0:
                break
            step = -d1 / d2
            alpha = alpha + step
            if abs(step) < 1e-15:
                break

    alpha = reduce_cell(ctx, alpha)
    target = np.sqrt(4.0 * xi**3 - ctx.g2 * xi - ctx.g3)
    if sign_hint == "-":
        target = -target
    deriv = wp_prime(ctx, alpha)
    if abs(deriv - target) > abs(deriv + target):
        alpha = reduce_cell(ctx, -alpha)
    return WpInverse(alpha=alpha, zeta_alpha=zeta(ctx, alpha))


def wp_trig_expansion(ctx: EllipticContext, k_max: int) -> np.ndarray:
    """Fourier coefficients c_k of wp relative to its trigonometric limit.

    wp(x) = -pi^2/3 + pi^2/sin^2(pi x) + sum_{k>=1} c_k (1 - cos 2 pi k x)
    with c_k = 8 pi^2 k p^{2k} / (1 - p^{2k}).
    """
    if k_max < 1:
        raise DomainError("k_max must be at least 1")
    k = np.arange(1, k_max + 1)
    p2k = ctx.p ** (2 * k)
    return 8.0 * np.pi**2 * k * p2k / (1.0 - p2k)


def wp_trig_eval(coeffs: np.ndarray, x):
    """Evaluate the truncated trigonometric expansion of wp at x."""
    x = np.asarray(x, dtype=complex)
    k = np.arange(1, len(coeffs) + 1)
    base = -np.pi**2 / 3.0 + np.pi**2 / np.sin(np.pi * x) ** 2
    corr = np.tensordot(
        1.0 - np.cos(2.0 * np.pi * np.multiply.outer(x, k)), coeffs, axes=([-1], [0])
    )
    val = base + corr
    return val if x.shape else complex(val)
