"""Monte Carlo oracles: inversion identities, span quadrature, Drury norms."""

import math

import numpy as np
import pytest
from scipy import integrate

from kplane import (
    BallIndicator,
    CauchyPowerField,
    DivergenceError,
    GaussianBump,
    TransformParams,
    best_constant,
    drury_norm_mc,
    inversion_jacobian,
    inversion_map,
    inversion_span_gap,
    inversion_volume_gap,
    radon2d_direct,
    sample_point_tuple,
    simplex_volume,
    span_integral,
)
from kplane.mc import MCEstimate

RNG = np.random.default_rng


# ---------------------------------------------------------------------------
# Inversion map and simplex volumes
# ---------------------------------------------------------------------------


def test_inversion_map_hand_values():
    out = inversion_map(np.array([2.0, 4.0]))
    assert np.allclose(out, [0.5, 0.25], atol=0.0)
    batch = inversion_map(np.array([[1.0, 2.0, -0.5], [3.0, 0.0, 2.0]]))
    assert np.allclose(batch, [[-2.0, -4.0, -2.0], [1.5, 0.0, 0.5]], atol=0.0)
    with pytest.raises(ValueError):
        inversion_map(np.array([1.0, 0.0]))


def test_inversion_map_is_involution():
    rng = RNG(0)
    for _ in range(100):
        x = rng.standard_normal(4)
        if abs(x[-1]) < 1e-6:
            continue
        back = inversion_map(inversion_map(x))
        assert np.max(np.abs(back - x)) < 1e-12 * max(1.0, np.max(np.abs(x)))


def test_inversion_jacobian_matches_finite_differences():
    rng = RNG(1)
    eps = 1e-6
    for _ in range(25):
        x = rng.standard_normal(3)
        if abs(x[-1]) < 0.2:
            continue
        jac = np.empty((3, 3))
        for i in range(3):
            dx = np.zeros(3)
            dx[i] = eps
            jac[:, i] = (inversion_map(x + dx) - inversion_map(x - dx)) / (2 * eps)
        fd = abs(np.linalg.det(jac))
        assert abs(fd / inversion_jacobian(x) - 1.0) < 1e-6


def test_simplex_volume_hand_cases():
    tri = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    assert abs(simplex_volume(tri) - 0.5) < 1e-15
    # unit k-simplex on 0, e_1 .. e_k has volume 1/k!
    for k, d in ((1, 3), (2, 4), (3, 5)):
        pts = np.zeros((k + 1, d))
        for i in range(k):
            pts[i + 1, i] = 1.0
        assert abs(simplex_volume(pts) - 1.0 / math.factorial(k)) < 1e-14, (k, d)
    # segment length
    seg = np.array([[1.0, 1.0, 1.0], [4.0, 5.0, 1.0]])
    assert abs(simplex_volume(seg) - 5.0) < 1e-14
    # degenerate (collinear) tuples give zero
    degen = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]])
    assert simplex_volume(degen) == 0.0


def test_simplex_volume_batched_and_invariant():
    rng = RNG(2)
    pts = rng.standard_normal((64, 3, 3))
    vols = simplex_volume(pts)
    assert vols.shape == (64,)
    # rigid motions leave the volume alone
    q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    shifted = pts @ q.T + rng.standard_normal(3)
    assert np.max(np.abs(simplex_volume(shifted) - vols)) < 1e-10


def test_sample_point_tuple_constraints():
    rng = RNG(3)
    for k, d in ((1, 2), (1, 3), (2, 3)):
        for _ in range(50):
            pts = sample_point_tuple(rng, k, d)
            assert pts.shape == (k + 1, d)
            assert np.min(np.abs(pts[:, -1])) >= 1e-2
            assert simplex_volume(pts) >= 1e-2


# ---------------------------------------------------------------------------
# Span quadrature
# ---------------------------------------------------------------------------


def test_span_integral_line_closed_form():
    # h in d = 2 along the horizontal line through (0,1) and (1,1): points
    # (lambda, 1) give int dlambda / (lambda^2 + 2) = pi / sqrt(2). This is
    # also the line-plane correspondence at unit distance: edge length V = 1,
    # so the span integral equals |S^0| T h(1) = 2 I(0,2) / sqrt(2)
    from kplane.params import i_integral

    f = CauchyPowerField.extremizer(TransformParams(1, 2))
    pts = np.array([[0.0, 1.0], [1.0, 1.0]])
    got = span_integral(f, pts)
    expect = math.pi / math.sqrt(2.0)
    assert abs(got / expect - 1.0) < 1e-12
    assert abs(2.0 * i_integral(0, 2) / math.sqrt(2.0) - expect) < 1e-15
    assert abs(float(f.line_integral(pts[0], pts[1] - pts[0])) / expect - 1.0) < 1e-14


def test_span_integral_plane_matches_closed_form():
    rng = RNG(4)
    m = rng.standard_normal((4, 4))
    P = 0.4 * (m @ m.T + 4 * np.eye(4))
    f = CauchyPowerField(2, P)
    pts = sample_point_tuple(rng, 2, 3)
    got = span_integral(f, pts)
    expect = float(f.plane_integral(pts[0], pts[1] - pts[0], pts[2] - pts[0]))
    assert abs(got / expect - 1.0) < 1e-10


def test_span_integral_unhinted_line():
    # a value-only object exercises the fallback centering on .center
    class Bump:
        center = np.array([0.5, -0.3])

        def value(self, x):
            delta = np.asarray(x) - self.center
            return np.exp(-np.einsum("...i,...i->...", delta, delta))

    b = Bump()
    pts = np.array([[0.0, -1.0], [1.0, 1.5]])
    got = span_integral(b, pts, n_nodes=96)
    e = pts[1] - pts[0]
    num, _ = integrate.quad(
        lambda lam: float(b.value(pts[0] + lam * e)), -np.inf, np.inf
    )
    assert abs(got / num - 1.0) < 1e-8


def test_span_integral_unhinted_plane():
    class Bump3:
        center = np.array([0.2, 0.1, -0.4])

        def value(self, x):
            delta = np.asarray(x) - self.center
            return np.exp(-np.einsum("...i,...i->...", delta, delta))

    b = Bump3()
    pts = np.array([[0.0, 0.0, 0.0], [1.0, 0.2, -0.1], [0.1, 1.1, 0.3]])
    got = span_integral(b, pts, n_nodes=96)
    e1, e2 = pts[1] - pts[0], pts[2] - pts[0]
    num, _ = integrate.dblquad(
        lambda u, v: float(
            b.value(pts[0] + math.tan(u) * e1 + math.tan(v) * e2)
        )
        * (1 + math.tan(u) ** 2)
        * (1 + math.tan(v) ** 2),
        -math.pi / 2, math.pi / 2, -math.pi / 2, math.pi / 2,
        epsabs=1e-12,
    )
    assert abs(got / num - 1.0) < 1e-7


def test_span_integral_rejects_bad_inputs():
    f = CauchyPowerField.extremizer(TransformParams(1, 3))  # tail exponent 2
    with pytest.raises(ValueError, match="k in"):
        span_integral(f, np.zeros((4, 3)))
    with pytest.raises(ValueError, match="k in"):
        span_integral(f, np.zeros((1, 3)))
    # plane integral of a tail-2 field diverges
    pts = np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 1.0], [0.0, 0.0, 2.0]])
    with pytest.raises(DivergenceError):
        span_integral(f, pts)


# ---------------------------------------------------------------------------
# Inversion identities (simplex volumes, span integrals)
# ---------------------------------------------------------------------------


def test_inversion_volume_identity():
    rng = RNG(5)
    worst = 0.0
    for k, d in ((1, 2), (1, 3), (2, 3)):
        for _ in range(100):
            gap = inversion_volume_gap(sample_point_tuple(rng, k, d))
            worst = max(worst, gap)
    print(f"volume-ratio identity, worst relative gap {worst:.3e}")
    assert worst < 1e-10


def test_inversion_span_identity():
    rng = RNG(6)
    worst = 0.0
    for k, d in ((1, 2), (1, 3)):
        f = CauchyPowerField.extremizer(TransformParams(k, d))
        for _ in range(20):
            gap = inversion_span_gap(f, sample_point_tuple(rng, k, d))
            worst = max(worst, gap)
    print(f"span-integral identity, worst relative gap {worst:.3e}")
    assert worst < 1e-5


# ---------------------------------------------------------------------------
# Drury Monte Carlo
# ---------------------------------------------------------------------------


def test_mc_estimate_as_dict():
    est = MCEstimate(value=1.5, std_error=0.1, n_samples=100, seed=7, n_rejected=3)
    assert est.as_dict() == {
        "value": 1.5,
        "std_error": 0.1,
        "n_samples": 100,
        "seed": 7,
        "rejected": 3,
    }


def test_drury_rejects_uncovered_cases():
    f = CauchyPowerField.extremizer(TransformParams(1, 2))
    with pytest.raises(ValueError):
        drury_norm_mc(f, TransformParams(2, 3))
    with pytest.raises(ValueError):
        drury_norm_mc(f, TransformParams(1, 4))
    with pytest.raises(ValueError):
        drury_norm_mc(f, TransformParams(1, 2), n_samples=1)


def test_drury_deterministic_given_seed():
    f = CauchyPowerField.extremizer(TransformParams(1, 2))
    a = drury_norm_mc(f, TransformParams(1, 2), n_samples=20_000, seed=42)
    b = drury_norm_mc(f, TransformParams(1, 2), n_samples=20_000, seed=42)
    assert a.value == b.value and a.std_error == b.std_error
    assert a.n_samples == b.n_samples and a.n_rejected == b.n_rejected
    c = drury_norm_mc(f, TransformParams(1, 2), n_samples=20_000, seed=43)
    assert c.value != a.value


def test_drury_extremizer_2d():
    # ||R h||_3^3 = A(1,2)^3 ||h||_{3/2}^3 = (pi/2) (2 pi)^2 = 2 pi^3,
    # using ||h||_{3/2}^{3/2} = |S^1| I(1, 3) = 2 pi
    pr = TransformParams(1, 2)
    f = CauchyPowerField.extremizer(pr)
    est = drury_norm_mc(f, pr, n_samples=1_000_000, seed=0)
    target = 2.0 * math.pi**3
    z = (est.value - target) / est.std_error
    print(
        f"Drury (1,2) on h: {est.value:.5f} +- {est.std_error:.5f} vs "
        f"{target:.5f} (z = {z:+.2f}, rejected {est.n_rejected})"
    )
    assert abs(z) <= 3.0
    assert est.n_samples + est.n_rejected == 1_000_000
    assert est.n_rejected < 100


def test_drury_extremizer_3d():
    # ||R h||_4^4 = A(1,3)^4 ||h||_2^4 = pi * (pi^2)^2 = pi^5
    pr = TransformParams(1, 3)
    f = CauchyPowerField.extremizer(pr)
    est = drury_norm_mc(f, pr, n_samples=400_000, seed=7)
    target = math.pi**5
    z = (est.value - target) / est.std_error
    print(f"Drury (1,3) on h: {est.value:.4f} +- {est.std_error:.4f} (z = {z:+.2f})")
    assert abs(z) <= 3.0


def test_drury_invariant_under_s():
    # S preserves ||R f||_q on nonnegative functions; compare estimates for
    # a shifted extremizer and its inversion image
    pr = TransformParams(1, 2)
    f = CauchyPowerField.extremizer(pr).compose_affine(
        np.eye(2), np.array([0.3, -0.45])
    )
    a = drury_norm_mc(f, pr, n_samples=400_000, seed=5)
    b = drury_norm_mc(f.s_transform(), pr, n_samples=400_000, seed=6)
    joint = math.hypot(a.std_error, b.std_error)
    z = (a.value - b.value) / joint
    print(f"S invariance: {a.value:.4f} vs {b.value:.4f} (z = {z:+.2f})")
    assert abs(z) <= 3.0


def test_drury_affine_covariance():
    # ||R (f o M)||_q^q = |det M|^{-q/p} ||R f||_q^q with q/p = 2 in d = 2
    pr = TransformParams(1, 2)
    f = CauchyPowerField.extremizer(pr)
    rng = RNG(12)
    M = rng.standard_normal((2, 2))
    M += math.copysign(1.5, np.linalg.det(M)) * np.eye(2)
    b = 0.5 * rng.standard_normal(2)
    det2 = np.linalg.det(M) ** 2
    a = drury_norm_mc(f, pr, n_samples=400_000, seed=12)
    g = drury_norm_mc(f.compose_affine(M, b), pr, n_samples=400_000, seed=13)
    joint = math.hypot(a.std_error, g.std_error * det2)
    z = (g.value * det2 - a.value) / joint
    print(f"affine covariance: det M = {np.linalg.det(M):.4f}, z = {z:+.2f}")
    assert abs(z) <= 3.0


def test_drury_against_direct_radon_gaussian():
    # a non-radial, non-Cauchy field: the only thing the two oracles share
    # is the line-integral closure, so agreement is a real cross-check
    pr = TransformParams(1, 2)
    g = GaussianBump(np.array([0.4, -0.7]), np.array([[1.2, 0.3], [0.3, 0.9]]), 1.5)
    direct = radon2d_direct(g, pr, n_angles=96, n_offsets=256)
    est = drury_norm_mc(g, pr, n_samples=400_000, seed=11)
    z = (est.value - direct) / est.std_error
    print(f"gaussian: direct {direct:.5f} vs mc {est.value:.5f} (z = {z:+.2f})")
    assert abs(z) <= 3.0


# ---------------------------------------------------------------------------
# Direct d = 2 oracle
# ---------------------------------------------------------------------------


def test_radon2d_direct_extremizer():
    pr = TransformParams(1, 2)
    f = CauchyPowerField.extremizer(pr)
    got = radon2d_direct(f, pr)
    assert abs(got / (2.0 * math.pi**3) - 1.0) < 1e-12


def test_radon2d_direct_ball_with_custom_offsets():
    # R 1_{B_1} has chords 2 sqrt(1 - t^2): ||R f||_3^3 = 8 * 3 pi / 8 = 3 pi.
    # The square-root edge defeats the default tan rule, so map offsets
    # through t = sin(phi), where the integrand becomes a cosine polynomial
    pr = TransformParams(1, 2)
    f = BallIndicator(np.zeros(2), 1.0)
    x, w = np.polynomial.legendre.leggauss(64)
    phi = 0.5 * math.pi * x
    t_grid = (np.sin(phi), 0.5 * math.pi * w * np.cos(phi))
    got = radon2d_direct(f, pr, t_grid=t_grid)
    assert abs(got / (3.0 * math.pi) - 1.0) < 1e-13


def test_radon2d_direct_matches_mc_consistency():
    pr = TransformParams(1, 2)
    f = CauchyPowerField.extremizer(pr)
    # shifting changes nothing: the line measure is rigid-motion invariant
    shifted = f.compose_affine(np.eye(2), np.array([0.8, -0.6]))
    a = radon2d_direct(f, pr)
    b = radon2d_direct(shifted, pr, n_offsets=384)
    assert abs(a / b - 1.0) < 1e-9


def test_radon2d_direct_rejects_other_dimensions():
    f = CauchyPowerField.extremizer(TransformParams(1, 3))
    with pytest.raises(ValueError):
        radon2d_direct(f, TransformParams(1, 3))
    with pytest.raises(ValueError):
        radon2d_direct(f, TransformParams(2, 3))
