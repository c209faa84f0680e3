"""Singular test geometries.

Two constructions live here.  The first is the unit-square boundary with
its circle parametrization, the phase-shifted sine eigenfunctions, and the
ball-average operator whose pointwise Laplacian approximation fails at the
corners.  The second is a radial perturbation of the circle built
inductively on dyadic rationals; its limit is Lipschitz but non-smooth on
a dense set, giving a product surface with dense singularities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import LevelTooDeep, OutOfChart, QuadratureNotConverged
from .kernels import ball_volume, sphere_volume

MAX_DYADIC_LEVEL = 24


# ---------------------------------------------------------------------------
# Square boundary chart
# ---------------------------------------------------------------------------

def square_boundary_point(theta):
    """Map the circle angle to the boundary of the unit square.

    The four branches run counterclockwise from (0, 0) at theta = 0 with
    constant speed 2/pi, so arc length is s = 2*theta/pi and the perimeter
    is 4.  Continuous at the branch points.
    """
    theta_arr = np.mod(np.asarray(theta, dtype=float), 2.0 * math.pi)
    s = np.atleast_1d(2.0 * theta_arr / math.pi)  # arc length in [0, 4)
    x = np.empty_like(s)
    y = np.empty_like(s)
    b0 = s <= 1.0
    b1 = (s > 1.0) & (s <= 2.0)
    b2 = (s > 2.0) & (s <= 3.0)
    b3 = s > 3.0
    x[b0], y[b0] = s[b0], 0.0
    x[b1], y[b1] = 1.0, s[b1] - 1.0
    x[b2], y[b2] = 3.0 - s[b2], 1.0
    x[b3], y[b3] = 0.0, 4.0 - s[b3]
    out = np.stack([x, y], axis=-1)
    if theta_arr.ndim == 0:
        return out[0]
    return out


def square_boundary_angle(point, tol: float = 1e-9) -> float:
    """Invert the square-boundary parametrization; raises OutOfChart off the boundary."""
    x, y = float(point[0]), float(point[1])
    if abs(y) <= tol and -tol <= x <= 1 + tol:
        s = min(max(x, 0.0), 1.0)
    elif abs(x - 1.0) <= tol and -tol <= y <= 1 + tol:
        s = 1.0 + min(max(y, 0.0), 1.0)
    elif abs(y - 1.0) <= tol and -tol <= x <= 1 + tol:
        s = 3.0 - min(max(x, 0.0), 1.0)
    elif abs(x) <= tol and -tol <= y <= 1 + tol:
        s = (4.0 - min(max(y, 0.0), 1.0)) % 4.0
    else:
        raise OutOfChart(f"point {(x, y)} is not on the unit-square boundary")
    return s * math.pi / 2.0


def circle_eigenfunction(theta, alpha: float = 0.0):
    """sin(theta - alpha), the first nontrivial circle eigenfunction at phase alpha."""
    return np.sin(np.asarray(theta, dtype=float) - alpha)


def product_eigenfunction(alpha: float, point, y=None) -> float:
    """Evaluate the phase-alpha eigenfunction on the square boundary at an R^2 point.

    The value does not depend on the second-factor coordinate y.
    """
    return float(circle_eigenfunction(square_boundary_angle(point), alpha))


# ---------------------------------------------------------------------------
# Ball-average Laplacian and its corner defect
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SensitivityConfig:
    """Settings for the corner-sensitivity experiment on square x circle."""

    alpha: float
    m2_radius: float
    eps_grid: tuple[float, ...]
    quad_resolution: int = 256

    def __post_init__(self):
        grid = tuple(float(e) for e in self.eps_grid)
        if any(e2 >= e1 for e1, e2 in zip(grid, grid[1:])):
            raise ValueError("eps_grid must be strictly decreasing")
        if any(e >= 1.0 for e in grid):
            raise ValueError("every eps must be below the face length 1")
        object.__setattr__(self, "eps_grid", grid)


def sigma_indicator(m: int) -> float:
    """Moment constant of the indicator kernel: Vol(S^(m-1)) / (m (m+2))."""
    return sphere_volume(m) / (m * (m + 2))


def _square_chord(s_a, s_b):
    """Euclidean distance in R^2 between boundary points at arc lengths s_a, s_b."""
    pa = square_boundary_point(np.asarray(s_a) * math.pi / 2.0)
    pb = square_boundary_point(np.asarray(s_b) * math.pi / 2.0)
    return np.linalg.norm(pa - pb, axis=-1)


def sensitivity_operator(config: SensitivityConfig, h: Callable, z0, eps: float,
                         separable: bool = True, rtol: float = 1e-3,
                         atol: float = 1e-9, max_doublings: int = 12) -> float:
    """Ball-average operator at z0 on M = boundary(square) x circle(r).

    Computes (1/eps^4) int over the ambient eps-ball of (h(z0) - h(z)),
    with the product arc-length measure.  ``h`` takes chart angles
    (theta1, theta2).  With ``separable=True`` (h independent of theta2)
    the circle factor is integrated exactly and only the square factor is
    discretized; otherwise a product midpoint rule is used.  The result is
    accepted once doubling the resolution changes it by less than ``rtol``
    relatively, else QuadratureNotConverged is raised.
    """
    if eps >= 1.0:
        raise ValueError("eps must be below the face length 1")
    theta1_0, theta2_0 = float(z0[0]), float(z0[1])
    r = config.m2_radius
    n0 = max(64, config.quad_resolution)

    def value(n_nodes: int) -> float:
        s0 = (2.0 * theta1_0 / math.pi) % 4.0
        w = min(2.0, 1.5 * eps)
        s = s0 + (np.arange(n_nodes) + 0.5) / n_nodes * 2.0 * w - w
        hs = 2.0 * w / n_nodes
        c1 = _square_chord(np.mod(s, 4.0), s0)
        gap2 = eps * eps - c1 * c1
        theta1 = np.mod(s, 4.0) * math.pi / 2.0
        if separable:
            rho1 = np.sqrt(np.maximum(gap2, 0.0))
            width = 4.0 * r * np.arcsin(np.minimum(rho1 / (2.0 * r), 1.0))
            width = np.minimum(width, 2.0 * math.pi * r)
            diff = h(theta1_0, theta2_0) - h(theta1, np.full_like(theta1, theta2_0))
            return float(np.sum(diff * width) * hs) / eps ** 4
        n2 = n_nodes
        phi = (np.arange(n2) + 0.5) / n2 * 2.0 * math.pi
        chord2 = 2.0 * r * np.abs(np.sin(0.5 * (phi - theta2_0)))
        inside = gap2[:, None] > chord2[None, :] ** 2
        diff = h(theta1_0, theta2_0) - h(theta1[:, None], np.broadcast_to(phi, (n_nodes, n2)))
        return float(np.sum(diff * inside) * hs * (2.0 * math.pi * r / n2)) / eps ** 4

    prev = value(n0)
    n = 2 * n0
    for _ in range(max_doublings):
        cur = value(n)
        if abs(cur - prev) <= max(rtol * max(abs(cur), abs(prev)), atol):
            return cur
        prev, n = cur, 2 * n
    raise QuadratureNotConverged(
        f"ball-average quadrature still moving after {max_doublings} doublings at eps={eps}")


def corner_defect_profile(m: int, t: float, method: str = "quadrature") -> float:
    """Radial profile whose absolute integral gives the corner L1 defect.

    Defined for t in [0, 1] as the difference between the full half-disc
    moment and the corner-shadow moment; vanishes at both endpoints.
    Closed forms exist for m in {1, 2} and are used when method="closed".
    """
    if not 0.0 <= t <= 1.0:
        raise ValueError("t must lie in [0, 1]")
    if method == "closed":
        if m == 1:
            return -t * math.sqrt(1.0 - t * t)
        if m == 2:
            return -(math.pi / 4.0) * t * (1.0 - t * t)
        raise ValueError("closed form only for m in {1, 2}")
    p = (m - 1) / 2.0
    first, _ = integrate.quad(lambda s: s * (1.0 - s * s) ** p, t, 1.0,
                              epsabs=1e-10, limit=200)
    top = math.sqrt(max(0.0, 1.0 - t * t))
    second, _ = integrate.quad(lambda s: (s + t) * max(0.0, 1.0 - s * s - t * t) ** p,
                               0.0, top, epsabs=1e-10, limit=200)
    return first - second


def corner_defect_l1_limit(config: SensitivityConfig, m: int) -> float:
    """Limit of the L1 deviation of the ball-average operator from (sigma/2) Laplacian.

    Equals 2 pi (|sin a| + |cos a|) * Vol(M2) * Vol(B^(m-1)) * int_0^1 |h_m|,
    with Vol(M2) = 2 pi r for the circle factor.  Strictly positive.
    """
    if m < 2:
        raise ValueError("the product construction needs m >= 2")
    absint, _ = integrate.quad(lambda t: abs(corner_defect_profile(m, t)), 0.0, 1.0,
                               epsabs=1e-10, limit=200)
    a = config.alpha
    return (2.0 * math.pi * (abs(math.sin(a)) + abs(math.cos(a)))
            * (2.0 * math.pi * config.m2_radius) * ball_volume(m - 1) * absint)


# ---------------------------------------------------------------------------
# Dyadic radial profile with dense slope jumps
# ---------------------------------------------------------------------------

def geometric_theta(ratio: float = 0.5) -> Callable[[int], float]:
    """The default summable coefficient sequence l -> ratio^l."""
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must lie in (0, 1)")
    return lambda l: ratio ** l


@dataclass(frozen=True)
class DyadicProfile:
    """Values of the inductive bump function on the level-n dyadic grid.

    ``alpha`` has 2^level + 1 entries for the points k / 2^level; levels
    below are exact subsamples.  ``theta_values[i]`` is the coefficient
    used at refinement level i + 2, and ``theta_sum`` their partial sum
    (it bounds every level up to ``level``).
    """

    level: int
    alpha: np.ndarray
    theta_values: np.ndarray
    theta_sum: float

    def grid(self) -> np.ndarray:
        return np.arange(2 ** self.level + 1) / 2.0 ** self.level


def dyadic_profile(theta: Callable[[int], float], level: int) -> DyadicProfile:
    """Fill the bump values up to ``level`` by the two midpoint recursions.

    Level 0 is (0, 0); level 1 pins the center to 1; each later level keeps
    earlier values and inserts the new quarter points as fixed convex
    combinations of their three even neighbors, weighted by theta(level).
    """
    if level < 1:
        raise ValueError("level must be at least 1")
    if level > MAX_DYADIC_LEVEL:
        raise LevelTooDeep(f"level {level} exceeds the guard {MAX_DYADIC_LEVEL}")
    thetas = np.array([float(theta(l)) for l in range(2, level + 1)])
    if np.any(thetas <= 0.0):
        raise ValueError("theta(l) must be positive")
    a = np.array([0.0, 1.0, 0.0])
    for n in range(2, level + 1):
        th = float(theta(n))
        prev = a
        a = np.empty(2 ** n + 1)
        a[::2] = prev
        k = np.arange(1, 2 ** (n - 2) + 1)
        a[4 * k - 3] = (th / 4.0 * prev[2 * k]
                        + (1.0 - th) / 2.0 * prev[2 * k - 1]
                        + (2.0 + th) / 4.0 * prev[2 * k - 2])
        a[4 * k - 1] = (th / 4.0 * prev[2 * k - 2]
                        + (1.0 - th) / 2.0 * prev[2 * k - 1]
                        + (2.0 + th) / 4.0 * prev[2 * k])
    return DyadicProfile(level=level, alpha=a, theta_values=thetas,
                         theta_sum=float(thetas.sum()))


def dyadic_profile_exact(theta: Callable[[int], object], level: int) -> list[Fraction]:
    """Exact-rational version of the bump recursion.

    The jumps at deep levels shrink like the product of the theta values
    and fall below double rounding, so statements about their sign or
    non-vanishing need exact arithmetic.  ``theta(l)`` must be convertible
    to Fraction (dyadic floats such as 2**-l convert exactly).
    """
    if level < 1:
        raise ValueError("level must be at least 1")
    if level > MAX_DYADIC_LEVEL:
        raise LevelTooDeep(f"level {level} exceeds the guard {MAX_DYADIC_LEVEL}")
    a = [Fraction(0), Fraction(1), Fraction(0)]
    for n in range(2, level + 1):
        th = Fraction(theta(n))
        if th <= 0:
            raise ValueError("theta(l) must be positive")
        prev = a
        a = [Fraction(0)] * (2 ** n + 1)
        a[::2] = prev
        for k in range(1, 2 ** (n - 2) + 1):
            a[4 * k - 3] = (th / 4 * prev[2 * k]
                            + (1 - th) / 2 * prev[2 * k - 1]
                            + (2 + th) / 4 * prev[2 * k - 2])
            a[4 * k - 1] = (th / 4 * prev[2 * k - 2]
                            + (1 - th) / 2 * prev[2 * k - 1]
                            + (2 + th) / 4 * prev[2 * k])
    return a


def dyadic_slopes_exact(alpha: list[Fraction]) -> tuple[list[Fraction], list[Fraction]]:
    """Exact slopes and jumps (periodic convention) for exact bump values."""
    n_seg = len(alpha) - 1
    d = [(alpha[k + 1] - alpha[k]) * n_seg for k in range(n_seg)]
    e = [d[k] - d[k - 1] for k in range(n_seg)]
    return d, e


def level_alpha(profile: DyadicProfile, level: int) -> np.ndarray:
    """Values on a coarser dyadic grid (exact subsample of the profile)."""
    if not 0 <= level <= profile.level:
        raise ValueError("level out of range")
    stride = 2 ** (profile.level - level)
    return profile.alpha[::stride]


@dataclass(frozen=True)
class SlopeData:
    """Per-interval slopes d, slope jumps e (periodic convention), and E = sum |e|."""

    level: int
    slopes: np.ndarray
    jumps: np.ndarray
    total_jump: float


def dyadic_slopes(profile: DyadicProfile, level: int | None = None) -> SlopeData:
    """Slopes of the piecewise-linear interpolant and their jumps at grid points.

    ``jumps[k] = slopes[k] - slopes[k-1]`` with the wrap-around convention
    ``slopes[-1] = slopes[last]``, matching the periodic extension.
    """
    n = profile.level if level is None else level
    a = level_alpha(profile, n)
    d = (a[1:] - a[:-1]) * 2.0 ** n
    e = d - np.roll(d, 1)
    return SlopeData(level=n, slopes=d, jumps=e, total_jump=float(np.abs(e).sum()))


def profile_function(profile: DyadicProfile, x, level: int | None = None):
    """Piecewise-linear interpolant f_n evaluated at x in [0, 1] (periodic)."""
    n = profile.level if level is None else level
    a = level_alpha(profile, n)
    xv = np.mod(np.asarray(x, dtype=float), 1.0)
    out = np.interp(xv, np.arange(2 ** n + 1) / 2.0 ** n, a)
    if out.ndim == 0:
        return float(out)
    return out


def _segment_speeds(alpha: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Endpoints of w = 2 pi (1 + f) and the constant slope d per dyadic segment."""
    n_seg = alpha.size - 1
    d = (alpha[1:] - alpha[:-1]) * n_seg
    w0 = 2.0 * math.pi * (1.0 + alpha[:-1])
    w1 = 2.0 * math.pi * (1.0 + alpha[1:])
    return w0, w1, d


def _speed_antiderivative(w: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Antiderivative of sqrt(w^2 + d^2) in w."""
    root = np.sqrt(w * w + d * d)
    out = 0.5 * w * root
    nz = d != 0.0
    out[nz] += 0.5 * d[nz] ** 2 * np.log(w[nz] + root[nz])
    return out


def _segment_lengths(alpha: np.ndarray) -> np.ndarray:
    """Exact arc length of each segment of the perturbed-circle curve."""
    n_seg = alpha.size - 1
    h = 1.0 / n_seg
    w0, w1, d = _segment_speeds(alpha)
    lengths = np.empty(n_seg)
    flat = d == 0.0
    lengths[flat] = h * w0[flat]
    sl = ~flat
    upper = _speed_antiderivative(w1[sl], d[sl])
    lower = _speed_antiderivative(w0[sl], d[sl])
    lengths[sl] = (upper - lower) / (2.0 * math.pi * d[sl])
    return lengths


@dataclass(frozen=True)
class SpeedConstantReport:
    value: float
    value_previous_level: float
    difference: float


def curve_speed_constant(profile: DyadicProfile) -> SpeedConstantReport:
    """Average speed of x -> (1 + f(x)) (cos 2 pi x, sin 2 pi x), per unit angle.

    Exact piecewise integral at the profile's level and at one level below;
    their difference estimates the remaining refinement error.
    """
    if profile.level < 4:
        raise ValueError("need level >= 4 for a meaningful convergence estimate")
    c_now = float(_segment_lengths(profile.alpha).sum()) / (2.0 * math.pi)
    c_prev = float(_segment_lengths(level_alpha(profile, profile.level - 1)).sum()) / (2.0 * math.pi)
    return SpeedConstantReport(value=c_now, value_previous_level=c_prev,
                               difference=c_now - c_prev)


def curve_arclength_table(alpha: np.ndarray) -> np.ndarray:
    """Cumulative arc length at the dyadic breakpoints (leading zero included)."""
    return np.concatenate([[0.0], np.cumsum(_segment_lengths(alpha))])


def singular_embedding(profile: DyadicProfile, m2_radius: float, x, y) -> np.ndarray:
    """Embed (x, y) into R^4: perturbed circle times a radius-r circle."""
    xv = np.asarray(x, dtype=float)
    yv = np.asarray(y, dtype=float)
    radial = 1.0 + profile_function(profile, xv)
    out = np.stack([
        radial * np.cos(2.0 * math.pi * xv),
        radial * np.sin(2.0 * math.pi * xv),
        m2_radius * np.cos(yv),
        m2_radius * np.sin(yv),
    ], axis=-1)
    return out
