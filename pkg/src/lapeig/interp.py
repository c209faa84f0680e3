"""Discrete-to-continuous maps and one-dimensional energy quadrature.

The interpolation operator averages sample values with the tail-integral
weights psi(d/eps), using the intrinsic distance (the graph deliberately
uses the ambient one; the mismatch is part of the method).  Where the
local mass vanishes the operator is undefined and raises, rather than
inventing a default value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CoverageGap, UndefinedAtPoint, UnsupportedDimension
from .kernels import KernelProfile
from .manifolds import PointCloud


@dataclass(frozen=True)
class InterpolationContext:
    """A cloud with the kernel and scale fixing the interpolation operator."""

    cloud: PointCloud
    kernel: KernelProfile
    eps: float

    def __post_init__(self):
        if self.cloud.model is None:
            raise ValueError("interpolation needs a cloud with a manifold model")
        if self.eps <= 0:
            raise ValueError("eps must be positive")


def restrict(f, cloud: PointCloud) -> np.ndarray:
    """Evaluate f on the sample chart points: the vector (f(x_1), ..., f(x_n))."""
    vals = np.asarray(f(cloud.params), dtype=float)
    if vals.shape != (cloud.n,):
        raise ValueError("f must map the params array to one value per point")
    return vals


def _psi_weights(ctx: InterpolationContext, x) -> np.ndarray:
    model = ctx.cloud.model
    if model.m == 1:
        queries = np.atleast_1d(np.asarray(x, dtype=float))
    else:
        queries = np.atleast_2d(np.asarray(x, dtype=float))
    dists = model.cross_distances(queries, ctx.cloud.params)
    return np.asarray(ctx.kernel.psi(dists / ctx.eps), dtype=float)


def theta_eps(ctx: InterpolationContext, x):
    """Local interpolation mass (1/n) sum_i psi(d(x, x_i)/eps); zero is legal."""
    w = _psi_weights(ctx, x)
    out = w.mean(axis=1)
    scalar = (np.ndim(x) == 0) if ctx.cloud.model.m == 1 else (np.ndim(x) == 1)
    return float(out[0]) if scalar else out


def lambda_eps(ctx: InterpolationContext, u, x):
    """Interpolated value sum_i psi(d(x, x_i)/eps) u_i / (n theta_eps(x)).

    A convex combination of the u_i carried by the eps-neighbors of x;
    reproduces constants exactly.  Raises UndefinedAtPoint where the local
    mass is zero.
    """
    u = np.asarray(u, dtype=float)
    if u.shape != (ctx.cloud.n,):
        raise ValueError("u must have one entry per sample point")
    w = _psi_weights(ctx, x)
    # same reduction as the numerator, so constants are reproduced exactly
    mass = w @ np.ones(w.shape[1])
    if np.any(mass <= 0.0):
        bad = int(np.nonzero(mass <= 0.0)[0][0])
        raise UndefinedAtPoint(
            f"no sample within eps of query point index {bad}; theta_eps = 0")
    out = (w @ u) / mass
    scalar = (np.ndim(x) == 0) if ctx.cloud.model.m == 1 else (np.ndim(x) == 1)
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class TransportReport:
    """Nearest-sample transport of a quadrature discretization of rho Vol.

    ``masses[i]`` is the weight carried to sample i; the relative
    deviations compare against the ideal 1/n per sample.
    """

    assignment: np.ndarray
    masses: np.ndarray
    max_distance: float
    max_relative_deviation: float
    median_relative_deviation: float


def transport_map(model, cloud: PointCloud, eps_tilde: float,
                  quad_points: int) -> TransportReport:
    """Assign quadrature mass to nearest samples (ties to the lowest index).

    Discretizes the weighted volume by a uniform chart grid, sends every
    node to its intrinsically nearest sample, and reports the transported
    distance and per-sample masses.  Raises CoverageGap when a node is
    farther than eps_tilde from every sample.
    """
    if eps_tilde <= 0:
        raise ValueError("eps_tilde must be positive")
    nodes, weights = model.chart_grid(quad_points)
    weights = weights / weights.sum()
    n = cloud.n
    masses = np.zeros(n)
    max_dist = 0.0
    block = max(1, int(2e6 // max(n, 1)))
    node_count = nodes.shape[0] if nodes.ndim > 1 else nodes.size
    assignment = np.empty(node_count, dtype=np.int64)
    for lo in range(0, node_count, block):
        hi = min(lo + block, node_count)
        dists = model.cross_distances(nodes[lo:hi], cloud.params)
        nearest = np.argmin(dists, axis=1)
        dmin = dists[np.arange(hi - lo), nearest]
        worst = float(dmin.max())
        if worst > eps_tilde:
            raise CoverageGap(
                f"a quadrature node is {worst:.4g} away from every sample "
                f"(allowed {eps_tilde:.4g})")
        max_dist = max(max_dist, worst)
        assignment[lo:hi] = nearest
        masses += np.bincount(nearest, weights=weights[lo:hi], minlength=n)
    with np.errstate(divide="ignore"):
        rel = np.abs(1.0 / n - masses) / np.where(masses > 0, masses, np.nan)
    rel = np.where(np.isnan(rel), np.inf, rel)
    return TransportReport(assignment=assignment, masses=masses,
                           max_distance=max_dist,
                           max_relative_deviation=float(np.max(rel)),
                           median_relative_deviation=float(np.median(rel)))


def _circle_like_grid(model, quad_points: int):
    if model.m != 1:
        raise UnsupportedDimension("energy quadrature supports 1-D chart models only")
    if quad_points < 16:
        raise ValueError("need at least 16 quadrature points")
    two_pi = 2.0 * math.pi
    theta = (np.arange(quad_points) + 0.5) * two_pi / quad_points
    h_arc = (two_pi / quad_points) * model.chart_speed
    return theta, h_arc


def dirichlet_energy_1d(model, f, quad_points: int = 4096) -> float:
    """int |f'|^2 rho^2 along arc length, by central differences on a periodic grid."""
    theta, h_arc = _circle_like_grid(model, quad_points)
    vals = np.asarray(f(theta), dtype=float)
    deriv = (np.roll(vals, -1) - np.roll(vals, 1)) / (2.0 * h_arc)
    rho = model.rho(theta)
    return float(np.sum(deriv ** 2 * rho ** 2) * h_arc)


def weighted_l2_mass_1d(model, f, quad_points: int = 4096, rho_power: int = 1) -> float:
    """int f^2 rho^p along arc length (p = 1 for the plain norm, 2 for normalized)."""
    theta, h_arc = _circle_like_grid(model, quad_points)
    vals = np.asarray(f(theta), dtype=float)
    rho = model.rho(theta)
    return float(np.sum(vals ** 2 * rho ** rho_power) * h_arc)
