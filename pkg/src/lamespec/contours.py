"""Branch-consistent contour integrals of P(E)/sqrt(V(E)).

The engine integrates along piecewise paths (line segments, automatic
circular detours around roots of V, and square-root substitution legs into
simple roots of V), transporting the branch of sqrt(V) by analytic
continuation: across each integration panel the branch is predicted
multiplicatively from the ratio V(next)/V(prev) and snapped back onto an exact
square root, which is unambiguous as long as the argument of V turns by less
than pi per panel (panels are refined until it turns by far less).

An endpoint at a simple root E0 of V is handled exactly by E = E0 + u^2 d:
with V(E0 + h) = h S(h) the integrand becomes 2 d P / sqrt(d S(u^2 d)), which
is analytic at u = 0.

Improper first-kind integrals from infinity reduce, via E = 1/s^2, to another
instance of the same engine with polynomial data

    V_red(s) = s^(2D) V(1/s^2),     num_red(s) = -2 s^(D-3) P(1/s^2),

both polynomials in s when deg P <= (deg V - 3)/2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial.legendre import leggauss

from .epoly import epoly, sorted_roots
from .errors import BranchCollisionError, DomainError, PrecisionError

_GAUSS_X, _GAUSS_W = leggauss(16)
_GAUSS_X = 0.5 * (_GAUSS_X + 1.0)  # nodes on [0, 1]
_GAUSS_W = 0.5 * _GAUSS_W
_MAX_PANELS = 4096
_ARG_TURN_LIMIT = 0.8  # max |arg V| turn per panel, well under pi


@dataclass
class EPath:
    """Waypoints of an integration contour in the E-plane.

    ``branch_seed`` is the value of sqrt(-Q) at the first node (None selects
    the principal branch; at a root endpoint it seeds the substitution leg).
    """

    nodes: list
    branch_seed: complex = None

    def validate(self, roots, root_tol: float = 1e-6) -> None:
        nodes = [complex(z) for z in self.nodes]
        if len(nodes) < 2:
            raise DomainError("a path needs at least two nodes")
        for a, b in zip(nodes, nodes[1:]):
            if a == b:
                raise DomainError("consecutive path nodes must differ")
        for z in nodes[1:-1]:
            if len(roots) and np.min(np.abs(np.asarray(roots) - z)) < root_tol:
                raise DomainError(
                    f"interior node {z} is within {root_tol} of a branch point"
                )


class _Line:
    def __init__(self, z0, z1):
        self.z0, self.z1 = complex(z0), complex(z1)

    def z(self, t):
        return self.z0 + t * (self.z1 - self.z0)

    def dz(self, t):
        return np.full_like(np.asarray(t, dtype=complex), self.z1 - self.z0)


class _Arc:
    def __init__(self, center, radius, th0, th1):
        self.c, self.r, self.th0, self.th1 = complex(center), radius, th0, th1

    def z(self, t):
        th = self.th0 + t * (self.th1 - self.th0)
        return self.c + self.r * np.exp(1j * th)

    def dz(self, t):
        th = self.th0 + t * (self.th1 - self.th0)
        return 1j * self.r * (self.th1 - self.th0) * np.exp(1j * th)


@dataclass
class _RootLeg:
    root: complex
    far: complex
    reversed: bool = False
    s_poly: Polynomial = field(default=None)  # V(root + h)/h

    def z(self, u):
        return self.root + u**2 * (self.far - self.root)


def _shifted_over_h(V: Polynomial, root: complex) -> Polynomial:
    """Coefficients of V(root + h)/h; asserts the root really is one."""
    c = np.asarray(V.coef, dtype=complex)
    deg = len(c) - 1
    shifted = np.zeros(deg + 1, dtype=complex)
    # Horner-style Taylor shift
    work = c.copy()
    for k in range(deg + 1):
        for i in range(deg - 1, k - 1, -1):
            work[i] += root * work[i + 1]
        shifted[k] = work[k]
    scale = np.max(np.abs(shifted)) + 1.0
    if abs(shifted[0]) > 1e-8 * scale:
        raise DomainError(f"{root} is not a root of the branch polynomial")
    return Polynomial(shifted[1:])


def _snap_sqrt(value, predicted):
    s = np.sqrt(value)
    return s if abs(s - predicted) <= abs(s + predicted) else -s


def _transport_boundaries(phi_vals, w_start):
    """Branch values at panel boundaries by ratio continuation plus snapping."""
    w = np.empty_like(phi_vals)
    w[0] = w_start
    for j in range(1, len(phi_vals)):
        pred = w[j - 1] * np.sqrt(phi_vals[j] / phi_vals[j - 1])
        w[j] = _snap_sqrt(phi_vals[j], pred)
    return w


def _piece_quadrature(phi_fn, num_fns, w_in, tol):
    """Adaptive composite Gauss quadrature of num/sqrt(phi) over t in [0,1].

    Returns (values per num_fn, transported sqrt at t=1).
    """
    n_panels = 8
    prev = None
    while n_panels <= _MAX_PANELS:
        t_bounds = np.linspace(0.0, 1.0, n_panels + 1)
        phi_b = phi_fn(t_bounds)
        if np.min(np.abs(phi_b)) == 0.0:
            raise BranchCollisionError("contour passes exactly through a root")
        turns = np.abs(np.angle(phi_b[1:] / phi_b[:-1]))
        if np.max(turns) > _ARG_TURN_LIMIT:
            n_panels *= 2
            continue
        w_b = _transport_boundaries(phi_b, w_in)
        # all Gauss nodes at once: t[j, g]
        tg = t_bounds[:-1, None] + np.diff(t_bounds)[:, None] * _GAUSS_X[None, :]
        phi_g = phi_fn(tg.ravel()).reshape(tg.shape)
        w_g = w_b[:-1, None] * np.sqrt(phi_g / phi_b[:-1, None])
        h = np.diff(t_bounds)[:, None]
        vals = []
        for num_fn in num_fns:
            num_g = num_fn(tg.ravel()).reshape(tg.shape)
            vals.append(np.sum(h * _GAUSS_W[None, :] * num_g / w_g))
        vals = np.asarray(vals)
        if prev is not None and np.all(
            np.abs(vals - prev) <= tol * (1.0 + np.abs(vals))
        ):
            return vals, w_b[-1]
        prev = vals
        n_panels *= 2
    raise PrecisionError(
        "contour quadrature did not converge", achieved=float(np.max(np.abs(vals - prev)))
    )


def _wrap_angle(a):
    return (a + np.pi) % (2.0 * np.pi) - np.pi


def _line_with_detours(z0, z1, roots, radius):
    """Replace a segment by line/arc pieces that keep clear of the roots.

    Detours always pass on the left of the travel direction, which fixes the
    homotopy class deterministically.
    """
    z0, z1 = complex(z0), complex(z1)
    d = z1 - z0
    length = abs(d)
    unit = d / length
    events = []
    for c in roots:
        c = complex(c)
        t_star = ((c - z0) * np.conj(d)).real / length**2
        if not (0.0 < t_star < 1.0):
            continue
        dist = abs(z0 + t_star * d - c)
        r_c = min(radius, 0.9 * abs(z0 - c), 0.9 * abs(z1 - c))
        if dist >= r_c:
            continue
        half = np.sqrt(r_c**2 - dist**2) / length
        t_in = max(t_star - half, 0.0)
        t_out = min(t_star + half, 1.0)
        events.append((t_in, t_out, c, r_c))
    events.sort()
    for (a0, a1, c0, _), (b0, b1, c1, _) in zip(events, events[1:]):
        if b0 < a1:
            raise BranchCollisionError(
                f"roots {c0} and {c1} are too close to detour around separately"
            )
    pieces = []
    t_prev = 0.0
    for t_in, t_out, c, r_c in events:
        if t_in > t_prev + 1e-14:
            pieces.append(_Line(z0 + t_prev * d, z0 + t_in * d))
        p_in = z0 + t_in * d
        p_out = z0 + t_out * d
        th_in = np.angle(p_in - c)
        th_out = np.angle(p_out - c)
        target = np.angle(1j * unit)  # midpoint of a left-side pass
        delta = _wrap_angle(th_out - th_in)
        alt = delta - np.sign(delta) * 2.0 * np.pi if delta != 0 else 2.0 * np.pi
        mid_a = _wrap_angle(th_in + delta / 2.0 - target)
        mid_b = _wrap_angle(th_in + alt / 2.0 - target)
        chosen = delta if abs(mid_a) <= abs(mid_b) else alt
        pieces.append(_Arc(c, r_c, th_in, th_in + chosen))
        t_prev = t_out
    if t_prev < 1.0 - 1e-14:
        pieces.append(_Line(z0 + t_prev * d, z1))
    return pieces


def integrate_branched(
    V: Polynomial,
    weights,
    nodes,
    seed=None,
    *,
    root_start: bool = False,
    root_end: bool = False,
    roots=None,
    detour_radius: float = None,
    tol: float = 1e-11,
):
    """Integrate each weight P in ``weights`` as P(E)/sqrt(V(E)) dE along nodes.

    All weights share one branch transport.  Returns (values, sqrt at end).
    ``root_start``/``root_end`` declare that the first/last node is a simple
    root of V, handled by the u^2 substitution.
    """
    nodes = [complex(z) for z in nodes]
    if roots is None:
        roots = sorted_roots(V)
    roots = np.asarray(roots, dtype=complex)
    scale = 1.0 + (np.max(np.abs(roots)) if len(roots) else 0.0)
    radius = detour_radius if detour_radius is not None else 0.05 * scale

    weight_polys = list(weights)

    pieces = []
    n_seg = len(nodes) - 1
    for i in range(n_seg):
        a, b = nodes[i], nodes[i + 1]
        if i == 0 and root_start:
            root = complex(roots[np.argmin(np.abs(roots - a))]) if len(roots) else a
            pieces.append(_RootLeg(root=root, far=b, s_poly=_shifted_over_h(V, root)))
            continue
        if i == n_seg - 1 and root_end:
            root = complex(roots[np.argmin(np.abs(roots - b))]) if len(roots) else b
            pieces.append(
                _RootLeg(root=root, far=a, reversed=True, s_poly=_shifted_over_h(V, root))
            )
            continue
        near = [r for r in roots if abs(r - a) > 1e-12 and abs(r - b) > 1e-12]
        pieces.extend(_line_with_detours(a, b, near, radius))

    totals = np.zeros(len(weights), dtype=complex)
    w_cur = None
    for idx, piece in enumerate(pieces):
        if isinstance(piece, _RootLeg):
            d = piece.far - piece.root
            s_poly = piece.s_poly

            def phi_fn(u, d=d, s_poly=s_poly):
                u = np.asarray(u, dtype=float)
                return d * s_poly(u**2 * d)

            num_fns = [
                (lambda u, wp=wpoly, piece=piece, d=d: 2.0 * d * wp(piece.z(np.asarray(u))))
                for wpoly in weight_polys
            ]
            if piece.reversed:
                if w_cur is None:
                    raise DomainError("a reversed root leg cannot start a path")
                w0 = np.sqrt(phi_fn(np.array(0.0)))
                vals, w_far = _piece_quadrature(phi_fn, num_fns, w0, tol)
                # transported sqrt(V) at the far end is u*sqrt(phi) with u=1
                if abs(w_far - w_cur) > abs(w_far + w_cur):
                    vals, w_far = -vals, -w_far
                mismatch = abs(w_far - w_cur) / (1.0 + abs(w_cur))
                if mismatch > 1e-6:
                    raise PrecisionError(
                        f"branch mismatch {mismatch:.2e} entering root leg"
                    )
                totals += -vals  # traversal runs far -> root
                w_cur = 0.0j
            else:
                if idx != 0:
                    raise DomainError("a forward root leg must start the path")
                w0 = np.sqrt(phi_fn(np.array(0.0))) if seed is None else complex(seed)
                chk = abs(w0**2 - phi_fn(np.array(0.0)))
                if chk > 1e-6 * (1.0 + abs(w0) ** 2):
                    raise DomainError("branch seed does not square to d*V'(root)")
                vals, w_end = _piece_quadrature(phi_fn, num_fns, w0, tol)
                totals += vals
                w_cur = w_end  # equals transported sqrt(V) at the far node
        else:

            def phi_fn(t, piece=piece):
                return V(piece.z(np.asarray(t)))

            num_fns = [
                (lambda t, wp=wpoly, piece=piece: wp(piece.z(np.asarray(t)))
                 * piece.dz(np.asarray(t)))
                for wpoly in weight_polys
            ]
            phi0 = phi_fn(np.array(0.0))
            if w_cur is None:
                w_cur = np.sqrt(phi0) if seed is None else complex(seed)
                if abs(w_cur**2 - phi0) > 1e-6 * (1.0 + abs(phi0)):
                    raise DomainError("branch seed does not square to V at the start")
            w_cur = _snap_sqrt(phi0, w_cur)
            vals, w_cur = _piece_quadrature(phi_fn, num_fns, w_cur, tol)
            totals += vals
    return totals, w_cur


def hyperelliptic_integral(curve, weight, path: EPath, tol: float = 1e-11) -> complex:
    """Integral of weight(E)/sqrt(-Q(E)) along the path, branch-transported.

    Endpoints that are roots of Q are detected automatically and handled by
    the substitution leg.
    """
    vals = hyperelliptic_integrals(curve, [weight], path, tol)
    return vals[0]


def hyperelliptic_integrals(curve, weights, path: EPath, tol: float = 1e-11):
    """Several weights over one path with a single shared branch transport."""
    V = -curve.q_poly
    roots = curve.roots
    nodes = [complex(z) for z in path.nodes]
    root_tol = 1e-6 * (1.0 + float(np.max(np.abs(roots))))
    start_is_root = bool(np.min(np.abs(roots - nodes[0])) < root_tol)
    end_is_root = bool(np.min(np.abs(roots - nodes[-1])) < root_tol)
    path.validate(roots)
    vals, _ = integrate_branched(
        V,
        weights,
        nodes,
        seed=path.branch_seed,
        root_start=start_is_root,
        root_end=end_is_root,
        roots=roots,
        tol=tol,
    )
    return list(vals)


def _reduced_to_infinity(V: Polynomial, weight: Polynomial):
    """Polynomial data of the E = 1/s^2 substitution for a first-kind form."""
    c = np.asarray(V.coef, dtype=complex)
    deg_v = len(c) - 1
    p = np.asarray(weight.coef, dtype=complex)
    deg_p = len(p) - 1
    if deg_p > (deg_v - 3) / 2:
        raise DomainError(
            f"weight degree {deg_p} too large for convergence at infinity "
            f"(need <= {(deg_v - 3) / 2})"
        )
    red_v = np.zeros(2 * deg_v + 1, dtype=complex)
    red_v[:: 2] = c[::-1]  # s^(2 deg_v) V(1/s^2)
    red_num = np.zeros(deg_v - 3 + 1, dtype=complex)
    for j, pj in enumerate(p):
        red_num[deg_v - 3 - 2 * j] = -2.0 * pj
    return epoly(red_v), epoly(red_num)


def integral_from_infinity(
    V: Polynomial,
    weight: Polynomial,
    z_target: complex,
    seed_sign: int = 1,
    tol: float = 1e-11,
) -> complex:
    """First-kind integral of weight/sqrt(V) from infinity to z_target.

    The branch at infinity is seeded with sqrt of the leading coefficient of
    V times ``seed_sign``; the substitution variable runs along the principal
    ray s = t / sqrt(z_target).
    """
    z_target = complex(z_target)
    if z_target == 0:
        raise DomainError("target 0 would make the substitution endpoint singular")
    red_v, red_num = _reduced_to_infinity(V, weight)
    s_end = 1.0 / np.sqrt(z_target)
    seed = seed_sign * np.sqrt(red_v(np.array(0.0)))
    red_roots = sorted_roots(red_v)
    vals, _ = integrate_branched(
        red_v,
        [red_num],
        [0.0, s_end],
        seed=seed,
        roots=red_roots,
        tol=tol,
    )
    return complex(vals[0])


def elliptic_integral_weierstrass(
    ctx,
    kind: str,
    xi_from,
    xi_to: complex,
    branch_seed=None,
    tol: float = 1e-11,
) -> complex:
    """Weierstrass-form elliptic integral along a straight segment.

    kind='first'  : integral of d xi / sqrt(4 xi^3 - g2 xi - g3)
    kind='second' : integral of xi d xi / sqrt(4 xi^3 - g2 xi - g3)

    ``xi_from=None`` (or inf) starts at infinity (first kind only); then
    ``branch_seed`` is interpreted as a sign for the branch at infinity.
    """
    V = epoly([-ctx.g3, -ctx.g2, 0.0, 4.0])
    if kind == "first":
        weight = epoly([1.0])
    elif kind == "second":
        weight = epoly([0.0, 1.0])
    else:
        raise DomainError("kind must be 'first' or 'second'")

    from_inf = xi_from is None or (
        isinstance(xi_from, (int, float)) and np.isinf(xi_from)
    )
    if from_inf:
        if kind != "first":
            raise DomainError("second-kind integral diverges at infinity")
        sign = 1 if branch_seed is None else int(np.sign(branch_seed.real or 1))
        return integral_from_infinity(V, weight, xi_to, seed_sign=sign, tol=tol)

    xi_from = complex(xi_from)
    if xi_from == xi_to:
        return 0.0 + 0.0j
    roots = sorted_roots(V)
    root_tol = 1e-6 * (1.0 + float(np.max(np.abs(roots))))
    vals, _ = integrate_branched(
        V,
        [weight],
        [xi_from, xi_to],
        seed=branch_seed,
        root_start=bool(np.min(np.abs(roots - xi_from)) < root_tol),
        root_end=bool(np.min(np.abs(roots - xi_to)) < root_tol),
        roots=roots,
        tol=tol,
    )
    return complex(vals[0])
