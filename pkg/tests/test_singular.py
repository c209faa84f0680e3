import math
from fractions import Fraction

import numpy as np
import pytest

from lapeig import singular as S
from lapeig.errors import LevelTooDeep, OutOfChart, QuadratureNotConverged


def test_square_boundary_param_examples():
    assert np.allclose(S.square_boundary_point(0.0), [0.0, 0.0])
    assert np.allclose(S.square_boundary_point(math.pi / 2.0), [1.0, 0.0])
    assert np.allclose(S.square_boundary_point(math.pi), [1.0, 1.0])
    assert np.allclose(S.square_boundary_point(math.pi / 4.0), [0.5, 0.0])


def test_square_boundary_param_continuity():
    for branch_theta in (math.pi / 2.0, math.pi, 1.5 * math.pi, 2.0 * math.pi):
        left = S.square_boundary_point(branch_theta - 1e-9)
        right = S.square_boundary_point(branch_theta + 1e-9)
        assert np.linalg.norm(left - right) < 1e-8


def test_square_boundary_angle_roundtrip():
    thetas = np.linspace(0.0, 2.0 * math.pi, 64, endpoint=False)
    for theta in thetas:
        back = S.square_boundary_angle(S.square_boundary_point(theta))
        assert back == pytest.approx(theta, abs=1e-9)
    with pytest.raises(OutOfChart):
        S.square_boundary_angle([0.5, 0.5])


def test_circle_eigenfunction():
    assert S.circle_eigenfunction(math.pi / 2.0) == pytest.approx(1.0)
    assert S.circle_eigenfunction(0.0) == pytest.approx(0.0)
    theta = np.linspace(0.0, 2.0 * math.pi, 37)
    for alpha in (0.0, 0.4, 1.3):
        sq = (S.circle_eigenfunction(theta, alpha) ** 2
              + S.circle_eigenfunction(theta, alpha + math.pi / 2.0) ** 2)
        assert np.allclose(sq, 1.0, atol=1e-12)


def test_product_eigenfunction_ignores_second_factor():
    val = S.product_eigenfunction(0.0, S.square_boundary_point(1.0), y=(0.3, 0.4))
    assert val == pytest.approx(math.sin(1.0), abs=1e-9)


CFG = S.SensitivityConfig(alpha=0.0, m2_radius=1.0,
                          eps_grid=(0.2, 0.1, 0.05, 0.025), quad_resolution=256)


def test_sensitivity_config_validation():
    with pytest.raises(ValueError):
        S.SensitivityConfig(alpha=0.0, m2_radius=1.0, eps_grid=(0.1, 0.2))
    with pytest.raises(ValueError):
        S.SensitivityConfig(alpha=0.0, m2_radius=1.0, eps_grid=(1.5, 0.2))


def test_sensitivity_constant_function():
    h = lambda t1, t2: np.ones_like(np.asarray(t1, dtype=float))
    val = S.sensitivity_operator(CFG, h, (0.7, 0.1), 0.1)
    assert val == 0.0


def test_sensitivity_midpoint_taylor_limit():
    # at a face midpoint the ball average approaches (sigma/2) times the
    # Laplacian value, and each eps halving shrinks the defect at least 2x
    sigma = S.sigma_indicator(2)
    h = lambda t1, t2: np.sin(np.asarray(t1, dtype=float))
    z0 = (math.pi / 4.0, 0.0)
    target = 0.5 * sigma * (math.pi / 2.0) ** 2 * math.sin(math.pi / 4.0)
    devs = []
    for eps in CFG.eps_grid:
        val = S.sensitivity_operator(CFG, h, z0, eps, rtol=1e-6)
        devs.append(abs(val - target))
    for a, b in zip(devs, devs[1:]):
        assert a >= 2.0 * b
    assert devs[-1] < 1e-3


def test_sensitivity_near_corner_defect_persists():
    # within eps of a corner the defect does not fade; it grows like 1/eps
    sigma = S.sigma_indicator(2)
    h = lambda t1, t2: np.sin(np.asarray(t1, dtype=float))
    devs = []
    for eps in CFG.eps_grid:
        theta0 = (eps / 2.0) * math.pi / 2.0  # arc distance eps/2 from the corner
        val = S.sensitivity_operator(CFG, h, (theta0, 0.0), eps, rtol=1e-5)
        target = 0.5 * sigma * (math.pi / 2.0) ** 2 * math.sin(theta0)
        devs.append(abs(val - target))
    assert min(devs) >= 1.0
    assert devs[-1] > devs[0]


def test_sensitivity_exact_corner_cancels():
    # at the corner itself both faces enter symmetrically and the odd part
    # of the phase-zero eigenfunction integrates away
    h = lambda t1, t2: np.sin(np.asarray(t1, dtype=float))
    val = S.sensitivity_operator(CFG, h, (0.0, 0.0), 0.1, rtol=1e-5)
    assert abs(val) < 1e-9


def test_sensitivity_product_rule_cross_check():
    h = lambda t1, t2: np.sin(np.asarray(t1, dtype=float))
    z0 = (math.pi / 4.0, 0.0)
    fast = S.sensitivity_operator(CFG, h, z0, 0.2, separable=True, rtol=1e-6)
    slow = S.sensitivity_operator(CFG, h, z0, 0.2, separable=False, rtol=5e-3)
    assert slow == pytest.approx(fast, rel=2e-2)


def test_sensitivity_quadrature_guard():
    h = lambda t1, t2: np.sin(np.asarray(t1, dtype=float))
    with pytest.raises(QuadratureNotConverged):
        S.sensitivity_operator(CFG, h, (0.4, 0.0), 0.05, separable=False,
                               rtol=1e-9, max_doublings=2)


def test_corner_defect_profile():
    for m in (1, 2, 3):
        assert S.corner_defect_profile(m, 0.0) == pytest.approx(0.0, abs=1e-10)
        assert S.corner_defect_profile(m, 1.0) == pytest.approx(0.0, abs=1e-10)
    assert S.corner_defect_profile(1, 0.5, "closed") == pytest.approx(
        -0.5 * math.sqrt(0.75), abs=1e-12)
    for m in (1, 2):
        for t in (0.2, 0.5, 0.8):
            assert S.corner_defect_profile(m, t) == pytest.approx(
                S.corner_defect_profile(m, t, "closed"), abs=1e-9)


def test_corner_defect_l1_limit():
    # alpha = 0, r = 1, m = 2: the closed forms collapse to pi^3 / 2
    val = S.corner_defect_l1_limit(CFG, 2)
    assert val == pytest.approx(math.pi ** 3 / 2.0, rel=1e-9)
    rotated = S.SensitivityConfig(alpha=math.pi / 4.0, m2_radius=1.0,
                                  eps_grid=(0.2, 0.1))
    assert S.corner_defect_l1_limit(rotated, 2) == pytest.approx(
        math.sqrt(2.0) * val, rel=1e-9)
    for alpha in (0.0, 0.3, 1.0, 2.5):
        cfg = S.SensitivityConfig(alpha=alpha, m2_radius=0.7, eps_grid=(0.2, 0.1))
        assert S.corner_defect_l1_limit(cfg, 2) > 0.0


# -- dyadic bump construction ----------------------------------------------

def test_dyadic_base_values():
    prof = S.dyadic_profile(S.geometric_theta(0.5), 1)
    assert np.array_equal(prof.alpha, [0.0, 1.0, 0.0])


def test_dyadic_level2_example():
    prof = S.dyadic_profile(lambda l: 0.25, 2)
    assert prof.alpha[1] == pytest.approx(0.375, abs=1e-15)  # (1 - theta)/2
    assert prof.alpha[3] == pytest.approx(0.375, abs=1e-15)


def test_dyadic_reflection_symmetry():
    prof = S.dyadic_profile(S.geometric_theta(0.5), 12)
    assert np.allclose(prof.alpha, prof.alpha[::-1], atol=1e-14)


def test_dyadic_nested_consistency():
    deep = S.dyadic_profile(S.geometric_theta(0.5), 10)
    for level in (1, 4, 7, 9):
        shallow = S.dyadic_profile(S.geometric_theta(0.5), level)
        assert np.array_equal(S.level_alpha(deep, level), shallow.alpha)


def test_dyadic_level1_slopes():
    prof = S.dyadic_profile(S.geometric_theta(0.5), 4)
    data = S.dyadic_slopes(prof, level=1)
    assert np.array_equal(data.slopes, [2.0, -2.0])
    assert np.array_equal(data.jumps, [4.0, -4.0])
    assert data.total_jump == 8.0


def test_dyadic_contraction_identity():
    # successive interpolants contract by theta(n+1)/2 in the sup norm
    prof = S.dyadic_profile(S.geometric_theta(0.5), 12)
    x = prof.grid()
    for n in range(2, 12):
        fn1 = S.profile_function(prof, x, level=n + 1)
        fn = S.profile_function(prof, x, level=n)
        fn0 = S.profile_function(prof, x, level=n - 1)
        lhs = np.max(np.abs(fn1 - fn))
        rhs = 0.5 ** (n + 1) / 2.0 * np.max(np.abs(fn - fn0))
        assert lhs == pytest.approx(rhs, abs=1e-12)


def test_dyadic_slope_recursions():
    prof = S.dyadic_profile(S.geometric_theta(0.5), 12)
    for n in range(2, 13):
        th = 0.5 ** n
        d = S.dyadic_slopes(prof, level=n).slopes
        prev = S.dyadic_slopes(prof, level=n - 1).slopes
        k = np.arange(2 ** (n - 2))
        assert np.allclose(d[4 * k], th / 2 * prev[2 * k + 1] + (1 - th / 2) * prev[2 * k],
                           atol=1e-12)
        assert np.allclose(d[4 * k + 1],
                           -th / 2 * prev[2 * k + 1] + (1 + th / 2) * prev[2 * k],
                           atol=1e-12)
        assert np.allclose(d[4 * k + 2],
                           (1 + th / 2) * prev[2 * k + 1] - th / 2 * prev[2 * k],
                           atol=1e-12)
        assert np.allclose(d[4 * k + 3],
                           (1 - th / 2) * prev[2 * k + 1] + th / 2 * prev[2 * k],
                           atol=1e-12)


def test_dyadic_jump_recursions_and_bound():
    prof = S.dyadic_profile(S.geometric_theta(0.5), 12)
    for n in range(2, 13):
        th = 0.5 ** n
        e = S.dyadic_slopes(prof, level=n).jumps
        prev = S.dyadic_slopes(prof, level=n - 1).jumps
        half = 2 ** (n - 1)
        k = np.arange(2 ** (n - 2))
        assert np.allclose(e[4 * k], th / 2 * prev[(2 * k + 1) % half] + prev[2 * k]
                           + th / 2 * prev[(2 * k - 1) % half], atol=1e-12)
        assert np.allclose(e[4 * k + 1], -th * prev[(2 * k + 1) % half], atol=1e-12)
        assert np.allclose(e[4 * k + 2], (1 + th) * prev[(2 * k + 1) % half], atol=1e-12)
        assert np.allclose(e[4 * k + 3], -th * prev[(2 * k + 1) % half], atol=1e-12)
        total = np.abs(e).sum()
        total_prev = np.abs(prev).sum()
        assert total <= (1.0 + 4.0 * th) * total_prev + 1e-12
        assert total <= 8.0 * math.exp(4.0 * prof.theta_sum) + 1e-9


def test_dyadic_jumps_never_vanish_exact():
    # the float jumps underflow the slope differences at deep levels, so
    # the non-vanishing statement is checked in exact dyadic rationals
    exact = S.dyadic_profile_exact(lambda l: Fraction(1, 2 ** l), 12)
    for level in range(1, 13):
        stride = 2 ** (12 - level)
        _, jumps = S.dyadic_slopes_exact(exact[::stride])
        assert all(j != 0 for j in jumps)


def test_dyadic_lipschitz_bound():
    prof = S.dyadic_profile(S.geometric_theta(0.5), 12)
    for n in range(1, 13):
        d = S.dyadic_slopes(prof, level=n).slopes
        assert np.max(np.abs(d)) <= 2.0 * math.exp(prof.theta_sum) + 1e-12


def test_speed_constant_flat_profiles():
    zero = S.DyadicProfile(level=5, alpha=np.zeros(33), theta_values=np.array([]),
                           theta_sum=0.0)
    assert S.curve_speed_constant(zero).value == 1.0
    lifted = S.DyadicProfile(level=5, alpha=np.full(33, 0.25),
                             theta_values=np.array([]), theta_sum=0.0)
    assert S.curve_speed_constant(lifted).value == pytest.approx(1.25, abs=1e-12)


def test_speed_constant_converges():
    prof = S.dyadic_profile(S.geometric_theta(0.5), 12)
    rep = S.curve_speed_constant(prof)
    assert abs(rep.difference) <= 1e-3
    assert rep.value > 1.0


def test_singular_embedding():
    zero = S.DyadicProfile(level=5, alpha=np.zeros(33), theta_values=np.array([]),
                           theta_sum=0.0)
    point = S.singular_embedding(zero, 0.5, 0.0, 0.3)
    assert np.allclose(point, [1.0, 0.0, 0.5 * math.cos(0.3), 0.5 * math.sin(0.3)])
    prof = S.dyadic_profile(S.geometric_theta(0.5), 8)
    mid = S.singular_embedding(prof, 1.0, 0.5, 0.0)
    assert np.linalg.norm(mid[:2]) == pytest.approx(2.0, abs=1e-12)  # 1 + f(1/2) = 2


def test_level_guard():
    with pytest.raises(LevelTooDeep):
        S.dyadic_profile(S.geometric_theta(0.5), 25)
    with pytest.raises(LevelTooDeep):
        S.dyadic_profile_exact(lambda l: Fraction(1, 2 ** l), 25)
