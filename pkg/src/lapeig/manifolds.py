"""Reference manifolds: embeddings, intrinsic metrics, densities, samplers, spectra.

Every model uses angle-based charts; wraparound is handled inside the
distance routines, so there is no atlas machinery.  Samplers draw i.i.d.
points from the weighted volume measure and are bit-reproducible from
(model, n, seed).  The flat torus is realized in R^4 so that uniform
angles are exactly the constant-density volume measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import eigsh

from . import singular as _sing
from .errors import (GridTooSmall, NoAnalyticSpectrum, SolverFailure,
                     UnsupportedDensity)

TWO_PI = 2.0 * math.pi

UNWEIGHTED = "unweighted"
WEIGHTED = "weighted"
NORMALIZED = "normalized"


@dataclass(frozen=True)
class DensitySpec:
    """Sampling density: constant, or 1 + beta*cos(theta) on the circle."""

    form: str  # "constant" | "cosine"
    beta: float = 0.0

    def __post_init__(self):
        if self.form not in ("constant", "cosine"):
            raise ValueError(f"unknown density form {self.form!r}")
        if self.form == "cosine" and not abs(self.beta) < 1.0:
            raise ValueError("cosine density needs |beta| < 1")

    @property
    def label(self) -> str:
        return "const" if self.form == "constant" else f"cos:{self.beta:g}"


def constant_density() -> DensitySpec:
    return DensitySpec("constant")


def cosine_density(beta: float) -> DensitySpec:
    return DensitySpec("cosine", beta=beta)


def parse_density(text: str) -> DensitySpec:
    if text == "const":
        return constant_density()
    if text.startswith("cos:"):
        return cosine_density(float(text.split(":", 1)[1]))
    raise ValueError(f"unknown density spec {text!r}; use const or cos:<beta>")


@dataclass(frozen=True)
class PointCloud:
    """An i.i.d. sample with its chart coordinates and ambient embedding."""

    manifold_id: str
    n: int
    seed: int
    params: np.ndarray
    ambient: np.ndarray
    model: object = field(default=None, repr=False, compare=False)


def ambient_cloud(points) -> PointCloud:
    """Wrap raw ambient coordinates as a cloud (no chart, ambient metric only)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    return PointCloud(manifold_id="ambient", n=pts.shape[0], seed=0,
                      params=np.arange(pts.shape[0], dtype=float), ambient=pts)


def _angdist(a, b):
    d = np.abs(a - b) % TWO_PI
    return np.minimum(d, TWO_PI - d)


def _take_spectrum(pairs, count):
    """Expand (value, multiplicity) pairs, ascending, to count entries."""
    out = []
    for val, mult in pairs:
        out.extend([val] * mult)
        if len(out) >= count:
            break
    return np.array(out[:count])


class _BaseModel:
    """Common plumbing; concrete models fill the geometry hooks."""

    kind = "base"
    m = 0
    d = 0

    def __init__(self, density: DensitySpec):
        self.density = density
        if density.form != "constant" and self.kind != "circle":
            raise UnsupportedDensity(
                f"{self.kind} only supports the constant density")

    # -- hooks ------------------------------------------------------------
    def volume(self) -> float:
        raise NotImplementedError

    def embed(self, params) -> np.ndarray:
        raise NotImplementedError

    def cross_distances(self, pa, pb) -> np.ndarray:
        raise NotImplementedError

    def sample_params(self, n: int, rng) -> np.ndarray:
        raise NotImplementedError

    def spectrum_pairs(self):
        """(eigenvalue, multiplicity) pairs of the plain Laplacian, ascending."""
        raise NotImplementedError

    # -- derived ----------------------------------------------------------
    def rho(self, params) -> np.ndarray:
        raise NotImplementedError

    def pair_distances(self, pa, pb) -> np.ndarray:
        """Elementwise intrinsic distance for paired chart points."""
        raise NotImplementedError

    def distance(self, p, q) -> float:
        pa = np.asarray(p, dtype=float)[None] if self.m == 1 else np.atleast_2d(p)
        pb = np.asarray(q, dtype=float)[None] if self.m == 1 else np.atleast_2d(q)
        return float(self.pair_distances(pa, pb)[0])

    def alpha_bound(self) -> float:
        vol = self.volume()
        return max(vol, 1.0 / vol)

    def lipschitz_rho(self) -> float:
        return 0.0

    def bilipschitz_bound(self) -> float:
        return math.pi / 2.0

    def sample(self, n: int, seed: int) -> PointCloud:
        if n < 1:
            raise ValueError("n must be positive")
        rng = np.random.default_rng(np.uint64(seed))
        params = self.sample_params(n, rng)
        return PointCloud(manifold_id=self.label, n=n, seed=int(seed),
                          params=params, ambient=self.embed(params), model=self)

    def analytic_spectrum(self, which: str, k: int):
        if k < 1:
            raise ValueError("k must be positive")
        if which not in (UNWEIGHTED, WEIGHTED, NORMALIZED):
            raise ValueError(f"unknown spectrum selector {which!r}")
        if which != UNWEIGHTED and self.density.form != "constant":
            raise NoAnalyticSpectrum(
                "non-constant density has no closed-form weighted spectrum; "
                "use the one-dimensional oracle")
        base = _take_spectrum(self.spectrum_pairs(), k + 1)
        if which == WEIGHTED:
            return base / self.volume()
        return base

    @property
    def label(self) -> str:
        return f"{self.kind}[{self.density.label}]"


class UnitCircle(_BaseModel):
    kind = "circle"
    m = 1
    d = 2
    chart_speed = 1.0

    def __init__(self, density: DensitySpec | None = None):
        super().__init__(density or constant_density())

    def volume(self):
        return TWO_PI

    def rho(self, params):
        theta = np.asarray(params, dtype=float)
        if self.density.form == "constant":
            return np.full_like(theta, 1.0 / TWO_PI)
        return (1.0 + self.density.beta * np.cos(theta)) / TWO_PI

    def embed(self, params):
        theta = np.asarray(params, dtype=float)
        return np.stack([np.cos(theta), np.sin(theta)], axis=-1)

    def cross_distances(self, pa, pb):
        return _angdist(np.asarray(pa, dtype=float)[:, None],
                        np.asarray(pb, dtype=float)[None, :])

    def pair_distances(self, pa, pb):
        return _angdist(np.asarray(pa, dtype=float), np.asarray(pb, dtype=float))

    def sample_params(self, n, rng):
        if self.density.form == "constant":
            return rng.uniform(0.0, TWO_PI, n)
        # inverse CDF on a dense table; the CDF is exact, only the
        # inversion is tabulated
        grid = np.linspace(0.0, TWO_PI, 2 ** 16 + 1)
        cdf = (grid + self.density.beta * np.sin(grid)) / TWO_PI
        return np.interp(rng.random(n), cdf, grid)

    def spectrum_pairs(self):
        yield (0.0, 1)
        j = 1
        while True:
            yield (float(j * j), 2)
            j += 1

    def alpha_bound(self):
        if self.density.form == "constant":
            return TWO_PI
        return TWO_PI / (1.0 - abs(self.density.beta))

    def lipschitz_rho(self):
        return abs(self.density.beta) / TWO_PI

    def chart_grid(self, resolution):
        theta = (np.arange(resolution) + 0.5) * TWO_PI / resolution
        return theta, self.rho(theta) * (TWO_PI / resolution)


class CliffordTorus(_BaseModel):
    """Flat torus (angles in [0, 2 pi)^2) embedded with unit radii in R^4."""

    kind = "torus"
    m = 2
    d = 4

    def __init__(self, density: DensitySpec | None = None):
        super().__init__(density or constant_density())

    def volume(self):
        return TWO_PI ** 2

    def rho(self, params):
        return np.full(np.atleast_2d(params).shape[0], 1.0 / self.volume())

    def embed(self, params):
        p = np.atleast_2d(np.asarray(params, dtype=float))
        return np.stack([np.cos(p[:, 0]), np.sin(p[:, 0]),
                         np.cos(p[:, 1]), np.sin(p[:, 1])], axis=-1)

    def cross_distances(self, pa, pb):
        pa = np.atleast_2d(pa)
        pb = np.atleast_2d(pb)
        d1 = _angdist(pa[:, None, 0], pb[None, :, 0])
        d2 = _angdist(pa[:, None, 1], pb[None, :, 1])
        return np.hypot(d1, d2)

    def pair_distances(self, pa, pb):
        pa = np.atleast_2d(pa)
        pb = np.atleast_2d(pb)
        return np.hypot(_angdist(pa[:, 0], pb[:, 0]), _angdist(pa[:, 1], pb[:, 1]))

    def sample_params(self, n, rng):
        return rng.uniform(0.0, TWO_PI, (n, 2))

    def spectrum_pairs(self):
        bound = 64
        rng_ = np.arange(-bound, bound + 1)
        vals = (rng_[:, None] ** 2 + rng_[None, :] ** 2).ravel()
        uniq, counts = np.unique(vals, return_counts=True)
        for v, c in zip(uniq, counts):
            yield (float(v), int(c))

    def chart_grid(self, resolution):
        q = max(2, int(math.isqrt(resolution)))
        axis = (np.arange(q) + 0.5) * TWO_PI / q
        t1, t2 = np.meshgrid(axis, axis, indexing="ij")
        params = np.stack([t1.ravel(), t2.ravel()], axis=-1)
        w = np.full(params.shape[0], (TWO_PI / q) ** 2 / self.volume())
        return params, w


class UnitSphere(_BaseModel):
    """Round two-sphere; chart is (colatitude, longitude)."""

    kind = "sphere"
    m = 2
    d = 3

    def __init__(self, density: DensitySpec | None = None):
        super().__init__(density or constant_density())

    def volume(self):
        return 4.0 * math.pi

    def rho(self, params):
        return np.full(np.atleast_2d(params).shape[0], 1.0 / self.volume())

    def embed(self, params):
        p = np.atleast_2d(np.asarray(params, dtype=float))
        st = np.sin(p[:, 0])
        out = np.stack([st * np.cos(p[:, 1]), st * np.sin(p[:, 1]), np.cos(p[:, 0])],
                       axis=-1)
        return out

    def cross_distances(self, pa, pb):
        # half-chord form: stable near zero and consistent with the embedding
        xa = self.embed(pa)
        xb = self.embed(pb)
        chord = np.linalg.norm(xa[:, None, :] - xb[None, :, :], axis=-1)
        return 2.0 * np.arcsin(np.clip(0.5 * chord, 0.0, 1.0))

    def pair_distances(self, pa, pb):
        chord = np.linalg.norm(self.embed(pa) - self.embed(pb), axis=-1)
        return 2.0 * np.arcsin(np.clip(0.5 * chord, 0.0, 1.0))

    def sample_params(self, n, rng):
        g = rng.standard_normal((n, 3))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        colat = np.arccos(np.clip(g[:, 2], -1.0, 1.0))
        lon = np.mod(np.arctan2(g[:, 1], g[:, 0]), TWO_PI)
        return np.stack([colat, lon], axis=-1)

    def spectrum_pairs(self):
        l = 0
        while True:
            yield (float(l * (l + 1)), 2 * l + 1)
            l += 1

    def chart_grid(self, resolution):
        # grid in (z, lon): the area element is exactly dz dlon
        q = max(2, int(math.isqrt(resolution)))
        z = -1.0 + (np.arange(q) + 0.5) * 2.0 / q
        lon = (np.arange(q) + 0.5) * TWO_PI / q
        zz, ll = np.meshgrid(z, lon, indexing="ij")
        params = np.stack([np.arccos(zz.ravel()), ll.ravel()], axis=-1)
        w = np.full(params.shape[0], (2.0 / q) * (TWO_PI / q) / self.volume())
        return params, w


class SquareBoundary(_BaseModel):
    """Boundary of the unit square, chart angle in [0, 2 pi), speed 2/pi.

    Isometric to a circle of circumference 4, so the spectrum is closed
    form while the ambient embedding has four genuine corners.
    """

    kind = "square"
    m = 1
    d = 2
    chart_speed = 2.0 / math.pi

    def __init__(self, density: DensitySpec | None = None):
        super().__init__(density or constant_density())
        self._bilip = None

    def volume(self):
        return 4.0

    def rho(self, params):
        return np.full(np.atleast_1d(params).shape[0], 0.25)

    def embed(self, params):
        return _sing.square_boundary_point(params)

    def cross_distances(self, pa, pb):
        sa = (2.0 / math.pi) * np.asarray(pa, dtype=float) % 4.0
        sb = (2.0 / math.pi) * np.asarray(pb, dtype=float) % 4.0
        d = np.abs(sa[:, None] - sb[None, :]) % 4.0
        return np.minimum(d, 4.0 - d)

    def pair_distances(self, pa, pb):
        sa = (2.0 / math.pi) * np.asarray(pa, dtype=float) % 4.0
        sb = (2.0 / math.pi) * np.asarray(pb, dtype=float) % 4.0
        d = np.abs(sa - sb) % 4.0
        return np.minimum(d, 4.0 - d)

    def sample_params(self, n, rng):
        return rng.uniform(0.0, TWO_PI, n)  # constant speed: uniform arc length

    def spectrum_pairs(self):
        yield (0.0, 1)
        j = 1
        while True:
            yield (float((math.pi * j / 2.0) ** 2), 2)
            j += 1

    def bilipschitz_bound(self):
        if self._bilip is None:
            theta = np.linspace(0.0, TWO_PI, 2048, endpoint=False)
            chord = np.linalg.norm(self.embed(theta)[:, None, :]
                                   - self.embed(theta)[None, :, :], axis=-1)
            intr = self.cross_distances(theta, theta)
            np.fill_diagonal(chord, 1.0)
            np.fill_diagonal(intr, 0.0)
            self._bilip = (math.pi / 2.0) * float(np.max(intr / chord))
        return self._bilip

    def chart_grid(self, resolution):
        theta = (np.arange(resolution) + 0.5) * TWO_PI / resolution
        return theta, self.rho(theta) * self.chart_speed * (TWO_PI / resolution)


class SingularSurface(_BaseModel):
    """Dyadically perturbed circle times a small circle, embedded in R^4.

    The radial bump has slope jumps at every dyadic rational, so the
    surface is Lipschitz but nowhere-smooth along a dense set; there is no
    closed-form spectrum.
    """

    kind = "singular"
    m = 2
    d = 4

    def __init__(self, profile: _sing.DyadicProfile, m2_radius: float = 1.0,
                 density: DensitySpec | None = None):
        super().__init__(density or constant_density())
        if m2_radius <= 0:
            raise ValueError("m2_radius must be positive")
        self.profile = profile
        self.m2_radius = float(m2_radius)
        self._breaks = profile.grid()
        self._cumlen = _sing.curve_arclength_table(profile.alpha)
        self._length = float(self._cumlen[-1])
        w0, w1, dslope = _sing._segment_speeds(profile.alpha)
        self._seg_d = dslope
        self._seg_w0 = w0
        self._max_speed = float(np.sqrt(np.maximum(w0 * w0, w1 * w1) + dslope ** 2).max())
        self._bilip = None

    def volume(self):
        return self._length * TWO_PI * self.m2_radius

    def rho(self, params):
        return np.full(np.atleast_2d(params).shape[0], 1.0 / self.volume())

    def speed(self, x):
        xv = np.mod(np.asarray(x, dtype=float), 1.0)
        f = _sing.profile_function(self.profile, xv)
        seg = np.minimum((xv * (self._breaks.size - 1)).astype(int),
                         self._breaks.size - 2)
        return np.sqrt((TWO_PI * (1.0 + f)) ** 2 + self._seg_d[seg] ** 2)

    def curve_arclength(self, x):
        """Exact arc length along the perturbed circle from 0 to x in [0, 1)."""
        xv = np.mod(np.asarray(x, dtype=float), 1.0)
        n_seg = self._breaks.size - 1
        seg = np.minimum((xv * n_seg).astype(int), n_seg - 1)
        frac = xv * n_seg - seg
        d = self._seg_d[seg]
        w0 = self._seg_w0[seg]
        wx = w0 + TWO_PI * d * frac / n_seg
        partial = np.where(
            d == 0.0,
            frac / n_seg * w0,
            (_sing._speed_antiderivative(wx, d) - _sing._speed_antiderivative(w0, d))
            / np.where(d == 0.0, 1.0, TWO_PI * d))
        return self._cumlen[seg] + partial

    def embed(self, params):
        p = np.atleast_2d(np.asarray(params, dtype=float))
        return _sing.singular_embedding(self.profile, self.m2_radius, p[:, 0], p[:, 1])

    def cross_distances(self, pa, pb):
        pa = np.atleast_2d(pa)
        pb = np.atleast_2d(pb)
        sa = self.curve_arclength(pa[:, 0])
        sb = self.curve_arclength(pb[:, 0])
        dc = np.abs(sa[:, None] - sb[None, :])
        dc = np.minimum(dc, self._length - dc)
        d2 = self.m2_radius * _angdist(pa[:, None, 1], pb[None, :, 1])
        return np.hypot(dc, d2)

    def pair_distances(self, pa, pb):
        pa = np.atleast_2d(pa)
        pb = np.atleast_2d(pb)
        dc = np.abs(self.curve_arclength(pa[:, 0]) - self.curve_arclength(pb[:, 0]))
        dc = np.minimum(dc, self._length - dc)
        return np.hypot(dc, self.m2_radius * _angdist(pa[:, 1], pb[:, 1]))

    def sample_params(self, n, rng):
        xs = np.empty(0)
        while xs.size < n:
            cand = rng.random(4096)
            accept = rng.random(4096) < self.speed(cand) / self._max_speed
            xs = np.concatenate([xs, cand[accept]])
        xs = xs[:n]
        ys = rng.uniform(0.0, TWO_PI, n)
        return np.stack([xs, ys], axis=-1)

    def spectrum_pairs(self):
        raise NoAnalyticSpectrum(
            "densely singular surface: use the graph itself or a 1-D oracle")

    def bilipschitz_bound(self):
        if self._bilip is None:
            rng = np.random.default_rng(1234)
            p = np.stack([rng.random(512), rng.uniform(0, TWO_PI, 512)], axis=-1)
            chord = np.linalg.norm(self.embed(p)[:, None, :]
                                   - self.embed(p)[None, :, :], axis=-1)
            intr = self.cross_distances(p, p)
            np.fill_diagonal(chord, 1.0)
            np.fill_diagonal(intr, 0.0)
            self._bilip = (math.pi / 2.0) * float(np.max(intr / chord))
        return self._bilip

    def chart_grid(self, resolution):
        q = max(2, int(math.isqrt(resolution)))
        xs = (np.arange(q) + 0.5) / q
        ys = (np.arange(q) + 0.5) * TWO_PI / q
        xx, yy = np.meshgrid(xs, ys, indexing="ij")
        params = np.stack([xx.ravel(), yy.ravel()], axis=-1)
        w = (self.rho(params) * self.speed(params[:, 0]) * self.m2_radius
             * (1.0 / q) * (TWO_PI / q))
        return params, w


def make_manifold(name: str, density: DensitySpec | None = None,
                  profile_level: int = 8, theta_ratio: float = 0.5,
                  m2_radius: float = 1.0):
    """Build a model by CLI name: circle | torus | sphere | square | singular."""
    if name == "circle":
        return UnitCircle(density)
    if name == "torus":
        return CliffordTorus(density)
    if name == "sphere":
        return UnitSphere(density)
    if name == "square":
        return SquareBoundary(density)
    if name == "singular":
        profile = _sing.dyadic_profile(_sing.geometric_theta(theta_ratio), profile_level)
        return SingularSurface(profile, m2_radius=m2_radius, density=density)
    raise ValueError(f"unknown manifold {name!r}")


# -- module-level operation wrappers ---------------------------------------

def sample_iid(model, n: int, seed: int) -> PointCloud:
    """n independent draws from the model's weighted volume measure."""
    return model.sample(n, seed)


def embed(model, params):
    return model.embed(params)


def intrinsic_distance(model, p, q) -> float:
    return model.distance(p, q)


def analytic_spectrum(model, which: str, k: int) -> np.ndarray:
    """First k+1 eigenvalues (with multiplicity, ascending) of the chosen operator.

    For constant densities the weighted operator is rho times the plain
    one and the normalized operator coincides with the plain one.
    """
    return model.analytic_spectrum(which, k)


def total_mass(model, resolution: int = 4096) -> float:
    """Quadrature of the density over the manifold (should be 1)."""
    if model.kind == "singular":
        return float(model.rho(np.zeros((1, 2)))[0] * model.volume())
    params, w = model.chart_grid(resolution if model.m == 1 else resolution ** 2)
    return float(np.sum(w))


def oracle_spectrum_circle_weighted(density: DensitySpec, grid_size: int, k: int,
                                    which: str = WEIGHTED) -> np.ndarray:
    """Finite-difference oracle for the weighted circle operators.

    Solves the generalized problem with stiffness weights rho^2 and mass
    weights rho (or rho^2 for the normalized operator) on a uniform
    periodic grid; independent of the graph pipeline.
    """
    if grid_size < 64:
        raise GridTooSmall("need at least 64 grid points")
    if which not in (WEIGHTED, NORMALIZED):
        raise ValueError("which must be 'weighted' or 'normalized'")
    circle = UnitCircle(density)
    n = grid_size
    h = TWO_PI / n
    theta = np.arange(n) * h
    rho_mid = circle.rho(theta + 0.5 * h)
    w = rho_mid ** 2 / h
    idx = np.arange(n)
    nxt = (idx + 1) % n
    rows = np.concatenate([idx, idx, nxt])
    cols = np.concatenate([idx, nxt, idx])
    diag = w + np.roll(w, 1)
    vals = np.concatenate([diag, -w, -w])
    stiff = sparse.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsc()
    rho_nodes = circle.rho(theta)
    mass = h * (rho_nodes if which == WEIGHTED else rho_nodes ** 2)
    mass_mat = sparse.diags(mass).tocsc()
    count = k + 1
    v0 = np.random.default_rng(0x5EED ^ n).standard_normal(n)
    try:
        vals_out = eigsh(stiff, k=count, M=mass_mat, sigma=-1e-3, which="LM",
                         v0=v0, return_eigenvectors=False)
    except Exception as exc:  # pragma: no cover - solver hiccups
        raise SolverFailure(str(exc)) from exc
    vals_out = np.sort(vals_out)
    tiny = np.abs(vals_out) < 1e-9 * max(1.0, float(np.abs(vals_out).max()))
    vals_out[tiny] = np.abs(vals_out[tiny])
    return vals_out
