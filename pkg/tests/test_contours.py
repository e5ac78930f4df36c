"""Branch-tracked contour integration: oracles, homotopy, root handling."""

import numpy as np
import pytest
from scipy.integrate import quad

from lamespec import contours as ct
from lamespec import elliptic as el
from lamespec import spectral as sp
from lamespec.epoly import epoly
from lamespec.errors import DomainError


@pytest.fixture(scope="module")
def setup_n1():
    ctx = el.compute_context(0.9j)
    xi = sp.compute_xi(ctx, 1)
    curve = sp.compute_q(xi)
    return ctx, xi, curve


def quad_oracle_on_segment(curve, weight, z0, z1, seed):
    """Independent adaptive Gauss-Kronrod oracle with pre-marched branch.

    The branch of sqrt(-Q) along the segment is tabulated by marching a dense
    grid; the integrand handed to scipy.integrate.quad looks up the nearest
    tabulated sign, entirely bypassing the production engine.
    """
    V = -curve.q_poly
    grid = np.linspace(0.0, 1.0, 20001)
    phi = V(z0 + grid * (z1 - z0))
    w = np.empty_like(phi)
    w[0] = seed
    for j in range(1, len(grid)):
        s = np.sqrt(phi[j])
        w[j] = s if abs(s - w[j - 1]) <= abs(s + w[j - 1]) else -s
    signs = w / np.sqrt(phi)

    def integrand(t):
        z = z0 + t * (z1 - z0)
        idx = int(round(t * (len(grid) - 1)))
        val = weight(z) * (z1 - z0) / (signs[idx] * np.sqrt(V(z)))
        return val

    re = quad(lambda t: integrand(t).real, 0, 1, limit=400, epsabs=1e-12)[0]
    im = quad(lambda t: integrand(t).imag, 0, 1, limit=400, epsabs=1e-12)[0]
    return re + 1j * im


class TestHyperelliptic:
    def test_degenerate_path_is_zero(self, setup_n1):
        _, _, curve = setup_n1
        z = 1.3 + 0.4j
        path = ct.EPath([z, z + 1.0, z])
        val = ct.hyperelliptic_integral(curve, epoly([1.0]), path)
        assert abs(val) < 1e-9

    def test_reversal_negates(self, setup_n1):
        _, _, curve = setup_n1
        w = epoly([1.0, 0.5])
        fwd = ct.hyperelliptic_integral(curve, w, ct.EPath([1.0 + 1.0j, 4.0 - 0.7j]))
        V = -curve.q_poly
        seed_end = None
        # transport the branch to the endpoint, then integrate back
        _, w_end = ct.integrate_branched(
            V, [w], [1.0 + 1.0j, 4.0 - 0.7j], roots=curve.roots
        )
        back, _ = ct.integrate_branched(
            V, [w], [4.0 - 0.7j, 1.0 + 1.0j], seed=w_end, roots=curve.roots
        )
        assert abs(fwd + back[0]) < 1e-9 * (1 + abs(fwd))

    def test_against_gauss_kronrod_oracle(self, setup_n1):
        # n=1, tau=0.9i, weight 1, straight segment -e1 -> -e1+2
        ctx, _, curve = setup_n1
        z0 = -ctx.e1 + 0.35j  # shifted off the root so the oracle applies too
        z1 = z0 + 2.0
        seed = np.sqrt(-curve.q_poly(z0))
        got = ct.hyperelliptic_integral(curve, epoly([1.0]), ct.EPath([z0, z1], seed))
        want = quad_oracle_on_segment(curve, epoly([1.0]), z0, z1, seed)
        assert abs(got - want) < 1e-9 * (1 + abs(want))

    def test_root_endpoint_leg(self, setup_n1):
        # start exactly at the root -e1 and compare against the oracle started
        # epsilon away (the integrand is integrable, so the limit matches)
        ctx, _, curve = setup_n1
        root = -ctx.e1
        target = root + 2.0 + 0.8j
        got = ct.hyperelliptic_integral(curve, epoly([1.0]), ct.EPath([root, target]))
        eps_pts = []
        for eps in (1e-4, 1e-5):
            z0 = root + eps * (target - root)
            seed0 = np.sqrt(-curve.q_poly(z0))
            v = quad_oracle_on_segment(curve, epoly([1.0]), z0, target, seed0)
            eps_pts.append(v)
        # Richardson in sqrt(eps): I(eps) ~ I - C sqrt(eps)
        extrap = (
            eps_pts[1]
            + (eps_pts[1] - eps_pts[0])
            * np.sqrt(1e-5)
            / (np.sqrt(1e-4) - np.sqrt(1e-5))
        )
        match = min(abs(got - extrap), abs(got + extrap))
        assert match < 1e-6 * (1 + abs(got))

    def test_path_independence_homotopic(self, setup_n1):
        _, _, curve = setup_n1
        a, b = -12.0 + 2.0j, 14.0 + 2.5j
        w = epoly([0.3, 1.0])
        seed = np.sqrt(-curve.q_poly(a))
        v1 = ct.hyperelliptic_integral(curve, w, ct.EPath([a, b], seed))
        v2 = ct.hyperelliptic_integral(
            curve, w, ct.EPath([a, 1.0 + 6.0j, 7.0 + 5.0j, b], seed)
        )
        assert abs(v1 - v2) < 1e-9 * (1 + abs(v1))

    def test_concatenation_additivity(self, setup_n1):
        _, _, curve = setup_n1
        V = -curve.q_poly
        w = epoly([1.0])
        a, b, c = 2.0 + 1.2j, 5.0 + 0.9j, 9.0 - 1.4j
        seed = np.sqrt(V(a))
        full, _ = ct.integrate_branched(V, [w], [a, b, c], seed=seed, roots=curve.roots)
        first, w_mid = ct.integrate_branched(V, [w], [a, b], seed=seed, roots=curve.roots)
        second, _ = ct.integrate_branched(V, [w], [b, c], seed=w_mid, roots=curve.roots)
        assert abs(full[0] - first[0] - second[0]) < 1e-10 * (1 + abs(full[0]))

    def test_loop_around_single_root_flips_branch(self, setup_n1):
        # closed loop around one simple root = -2 * (integral root -> basepoint)
        ctx, _, curve = setup_n1
        root = -ctx.e1
        base = root + 1.5 + 1.1j
        w = epoly([1.0])
        V = -curve.q_poly
        seed = np.sqrt(V(base))
        # square loop around the root only
        r = 0.6
        loop = [
            base,
            root + r,
            root + r * 1j,
            root - r,
            root - r * 1j,
            root + r,
            base,
        ]
        got, w_end = ct.integrate_branched(V, [w], loop, seed=seed, roots=curve.roots)
        # the transported branch must come back flipped
        assert abs(w_end + seed) < 1e-6 * abs(seed)
        from_root, _ = ct.integrate_branched(
            V, [w], [root, base], root_start=True, roots=curve.roots
        )
        match = min(abs(got[0] - 2 * from_root[0]), abs(got[0] + 2 * from_root[0]))
        assert match < 1e-8 * (1 + abs(got[0]))

    def test_interior_node_near_root_rejected(self, setup_n1):
        ctx, _, curve = setup_n1
        path = ct.EPath([1.0, -ctx.e1 + 1e-9, 3.0])
        with pytest.raises(DomainError):
            ct.hyperelliptic_integral(curve, epoly([1.0]), path)


class TestWeierstrassIntegrals:
    def test_first_kind_from_infinity_inverts_wp(self):
        # integral from infinity to wp(alpha0) equals alpha0 mod lattice
        ctx = el.compute_context(0.8j)
        alpha0 = 0.23 + 0.31j
        xi0 = el.wp(ctx, alpha0)
        val = ct.elliptic_integral_weierstrass(ctx, "first", None, xi0)
        # compare mod the period lattice, allowing overall sign
        best = np.inf
        for s in (+1, -1):
            for m in range(-3, 4):
                for n in range(-3, 4):
                    best = min(best, abs(s * val - alpha0 + m + n * ctx.tau))
        assert best < 1e-9

    def test_second_kind_zero_length(self):
        ctx = el.compute_context(0.8j)
        v = ct.elliptic_integral_weierstrass(ctx, "second", ctx.e1, ctx.e1)
        assert v == 0j

    def test_second_kind_is_zeta_difference(self):
        # d(-zeta) = wp dx: integral_{e1}^{wp(a)} xi dxi / sqrt(R) = zeta(w1) - zeta(a)
        ctx = el.compute_context(0.8j)
        a = 0.27 + 0.19j
        xi_a = el.wp(ctx, a)
        val = ct.elliptic_integral_weierstrass(ctx, "second", ctx.e1, xi_a)
        want = el.zeta(ctx, 0.5) - el.zeta(ctx, a)
        # sign and quasi-period ambiguity: 2 eta1 m + 2 eta3 n
        best = np.inf
        for s in (+1, -1):
            for m in range(-3, 4):
                for n in range(-3, 4):
                    best = min(
                        best, abs(s * val - want + 2 * m * ctx.eta1 + 2 * n * ctx.eta3)
                    )
        assert best < 1e-8

    def test_second_kind_from_infinity_rejected(self):
        ctx = el.compute_context(0.8j)
        with pytest.raises(DomainError):
            ct.elliptic_integral_weierstrass(ctx, "second", None, 1.0 + 0j)
