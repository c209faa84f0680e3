import math

import numpy as np
import pytest
import scipy.linalg as sla

from lapeig import graph as G
from lapeig import kernels as K
from lapeig import manifolds as M
from lapeig import spectral as S
from lapeig.errors import (DegenerateBasis, FExceedsOne, GapViolation,
                           KTooLarge, ZeroVector)

IND = K.indicator_kernel()


def clique3():
    return G.build_graph(M.ambient_cloud([[0, 0], [0.1, 0], [0, 0.1]]), IND, 0.5)


def path3():
    return G.build_graph(M.ambient_cloud([[0.0], [0.5], [1.0]]), IND, 0.6)


def rand_spd(n, rng, ridge=1.0):
    a = rng.standard_normal((n, n))
    return a @ a.T / n + ridge * np.eye(n)


def rand_psd(n, rng):
    a = rng.standard_normal((n, n))
    return a @ a.T / n


def test_clique_spectrum():
    spec = S.unnormalized_spectrum(clique3(), 2)
    assert np.allclose(spec.values, [0.0, 3.0, 3.0], atol=1e-12)


def test_path_spectrum():
    spec = S.unnormalized_spectrum(path3(), 2)
    assert np.allclose(spec.values, [0.0, 1.0, 3.0], atol=1e-12)


def test_path_normalized_spectrum():
    g = path3()
    spec = S.normalized_spectrum(g, 2)
    assert np.allclose(spec.values, [0.0, 0.5, 7.0 / 6.0], atol=1e-12)
    # dense generalized oracle
    lap = g.laplacian().toarray()
    dmat = np.diag(g.degrees)
    ref = sla.eigh(lap, dmat, eigvals_only=True)
    assert np.allclose(spec.values, ref, atol=1e-12)
    # middle eigenpair identity L v = (1/2) D v with v = (1, 0, -1)
    v = np.array([1.0, 0.0, -1.0])
    assert np.allclose(lap @ v, 0.5 * dmat @ v, atol=1e-12)


def test_clique_normalized():
    spec = S.normalized_spectrum(clique3(), 2)
    assert np.allclose(spec.values, [0.0, 1.0, 1.0], atol=1e-12)


def test_sparse_solver_matches_dense():
    cloud = M.sample_iid(M.UnitCircle(), 200, 3)
    g = G.build_graph(cloud, IND, G.epsilon_schedule(200, 1))
    dense = S.unnormalized_spectrum(g, 4, dense_threshold=10_000)
    sparse = S.unnormalized_spectrum(g, 4, dense_threshold=8)
    assert np.allclose(dense.values, sparse.values, atol=1e-8)
    rep = S.subspace_alignment(dense.vectors[:, 1:3], sparse.vectors[:, 1:3])
    assert np.max(rep.residuals) < 1e-8


def test_normalized_equals_symmetric_similarity():
    cloud = M.sample_iid(M.UnitCircle(), 150, 5)
    g = G.build_graph(cloud, IND, 0.5)
    spec = S.normalized_spectrum(g, 3)
    inv_sqrt = np.diag(1.0 / np.sqrt(g.degrees))
    sym = inv_sqrt @ g.laplacian().toarray() @ inv_sqrt
    ref = np.sort(sla.eigh(sym, eigvals_only=True))[:4]
    assert np.allclose(spec.values, ref, atol=1e-10)


def test_exactly_one_near_zero_eigenvalue():
    cloud = M.sample_iid(M.UnitCircle(), 400, 7)
    g = G.build_graph(cloud, IND, G.epsilon_schedule(400, 1))
    assert G.connectivity_report(g).components == 1
    spec = S.unnormalized_spectrum(g, 4)
    below = np.sum(spec.values < 1e-8 * spec.values[1])
    assert below == 1


def test_mean_dot_orthonormality():
    cloud = M.sample_iid(M.UnitCircle(), 300, 11)
    g = G.build_graph(cloud, IND, G.epsilon_schedule(300, 1))
    spec = S.unnormalized_spectrum(g, 3)
    gram = spec.vectors.T @ spec.vectors / g.n
    assert np.allclose(gram, np.eye(4), atol=1e-8)
    assert np.all(np.diff(spec.values) >= -1e-12)
    nspec = S.normalized_spectrum(g, 3, kernel=IND, m=1)
    wgram = nspec.vectors.T @ (nspec.vectors * nspec.weights[:, None]) / g.n
    assert np.allclose(wgram, np.eye(4), atol=1e-8)
    assert np.all(np.diff(nspec.values) >= -1e-12)


def test_similarity_invariance_under_kernel_scaling():
    cloud = M.sample_iid(M.UnitCircle(), 250, 2)
    g = G.build_graph(cloud, IND, 0.4)
    base = S.normalized_spectrum(g, 3).values
    for c in (0.5, 2.0):
        scaled = G.NeighborhoodGraph(
            n=g.n, eps=g.eps, kernel_id=g.kernel_id, metric=g.metric,
            kernel_matrix=(g.kernel_matrix * c).tocsr(), degrees=g.degrees * c)
        vals = S.normalized_spectrum(scaled, 3).values
        assert np.allclose(vals, base, atol=1e-9)


def test_rescale_unnormalized():
    assert S.rescale_unnormalized(3.0, 3, 1.0, 2.0 / 3.0, 1) == pytest.approx(3.0)
    assert S.rescale_unnormalized(0.0, 10, 0.2, 1.0, 2) == 0.0
    ratio = (S.rescale_unnormalized(1.0, 8, 0.5, 1.0, 1)
             / S.rescale_unnormalized(1.0, 8, 1.0, 1.0, 1))
    assert ratio == pytest.approx(8.0)


def test_rescale_normalized():
    assert S.rescale_normalized(1.0, 1.0, 2.0 / 3.0, 2.0) == pytest.approx(6.0)
    assert S.rescale_normalized(0.0, 0.3, 1.0, 1.0) == 0.0
    # the sample-size variant is exposed for comparison and differs by 1/n
    with_n = S.rescale_normalized(1.0, 1.0, 2.0 / 3.0, 2.0, n=10)
    assert with_n == pytest.approx(0.6)


def test_rayleigh_quotient():
    g = clique3()
    lap = g.laplacian()
    num = lambda u: float(u @ (lap @ u))
    den = lambda u: float(u @ u)
    e1 = np.array([1.0, -1.0, 0.0])
    assert S.rayleigh_quotient(num, den, e1) == pytest.approx(3.0)
    assert S.rayleigh_quotient(num, den, np.ones(3)) == 0.0
    with pytest.raises(ZeroVector):
        S.rayleigh_quotient(num, den, np.zeros(3))
    rng = np.random.default_rng(0)
    gp = path3()
    lp = gp.laplacian()
    nump = lambda u: float(u @ (lp @ u))
    for _ in range(25):
        u = rng.standard_normal(3)
        q = S.rayleigh_quotient(nump, den, u)
        assert -1e-12 <= q <= 3.0 + 1e-12


def test_minimax_consistency():
    cloud = M.sample_iid(M.UnitCircle(), 120, 13)
    g = G.build_graph(cloud, IND, 0.5)
    lap = g.laplacian().toarray()
    spec = S.unnormalized_spectrum(g, 3)
    rng = np.random.default_rng(42)
    for j in range(1, 4):
        for _ in range(50):
            basis = rng.standard_normal((120, j + 1))
            pencil_max = sla.eigh(basis.T @ lap @ basis, basis.T @ basis,
                                  eigvals_only=True)[-1]
            assert spec.values[j] <= pencil_max + 1e-9


def test_k_too_large():
    with pytest.raises(KTooLarge):
        S.unnormalized_spectrum(clique3(), 3)


def test_subspace_alignment_identical_and_orthogonal():
    rng = np.random.default_rng(1)
    a = rng.standard_normal((60, 2))
    rep = S.subspace_alignment(a, a @ rng.standard_normal((2, 2)))
    assert np.allclose(rep.principal_angles, 0.0, atol=1e-7)
    assert np.allclose(rep.residuals, 0.0, atol=1e-12)
    t = np.linspace(0.0, 2.0 * math.pi, 64, endpoint=False)
    rep2 = S.subspace_alignment(np.sin(t)[:, None], np.cos(t)[:, None])
    assert rep2.principal_angles[0] == pytest.approx(math.pi / 2.0, abs=1e-10)
    assert rep2.residuals[0] == pytest.approx(1.0, abs=1e-10)


def test_subspace_alignment_degenerate():
    a = np.ones((30, 2))
    with pytest.raises(DegenerateBasis):
        S.subspace_alignment(a, np.random.default_rng(0).standard_normal((30, 2)))


# -- quadratic-form comparison machinery ------------------------------------

def test_clamped_form_property():
    rng = np.random.default_rng(5)
    for _ in range(60):
        n = int(rng.integers(3, 9))
        inner = rand_spd(n, rng)
        form = rand_psd(n, rng)
        vals, _ = S.form_eigensystem(form, inner)
        lam = float(rng.uniform(0.1, 3.0))
        cutoff = lam + float(rng.uniform(0.0, 2.0))
        clamped = S.clamped_form(form, inner, lam, cutoff)
        # never exceeds the original form
        diff_vals = sla.eigh(form - clamped, inner, eigvals_only=True)
        assert diff_vals.min() > -1e-9
        # restricted eigenvalue floor
        ldim = int(rng.integers(1, n + 1))
        basis = rng.standard_normal((n, ldim))
        sub = sla.eigh(basis.T @ clamped @ basis, basis.T @ inner @ basis,
                       eigvals_only=True)
        for j in range(ldim):
            assert sub[j] >= min(lam, vals[j]) - 1e-8


def test_eigenvalue_comparison_isometry_tight():
    rng = np.random.default_rng(3)
    n = 5
    inner = np.eye(n)
    form = np.diag([0.0, 1.0, 2.0, 3.0, 4.0])
    chk = S.eigenvalue_comparison_check(form, inner, form, inner, np.eye(n), 2)
    assert chk.e_sup == pytest.approx(0.0, abs=1e-12)
    assert chk.passed


def test_eigenvalue_comparison_uniform_shift():
    n = 5
    inner = np.eye(n)
    form = np.diag([0.0, 1.0, 2.0, 3.0, 4.0])
    shift = 0.7
    chk = S.eigenvalue_comparison_check(form, inner, form + shift * inner, inner,
                                        np.eye(n), 2)
    assert chk.e_sup == pytest.approx(shift, abs=1e-9)
    assert chk.passed
    assert np.min(chk.margins) == pytest.approx(chk.slack, abs=1e-9)


def test_eigenvalue_comparison_random_pairs():
    rng = np.random.default_rng(17)
    for _ in range(30):
        chk = S.eigenvalue_comparison_check(
            rand_psd(6, rng), rand_spd(6, rng), rand_psd(6, rng), rand_spd(6, rng),
            rng.standard_normal((6, 6)), 2, grid_density=128)
        assert chk.passed


def test_eigenvector_comparison_isometry():
    form = np.diag([0.5, 1.0, 2.0, 4.0, 6.0, 9.0])
    eye = np.eye(6)
    rep = S.eigenvector_comparison(form, eye, form, eye, eye, eye, 2, 2, 128)
    assert rep.e1 == rep.e2 == rep.e3 == rep.e4 == 0.0
    assert rep.f_bound == pytest.approx(0.0, abs=1e-12)  # spread s = 0 for k = l
    assert np.allclose(rep.residuals, 0.0, atol=1e-12)
    assert rep.conclusion_ok


def test_eigenvector_comparison_perturbed():
    rng = np.random.default_rng(23)
    checked = 0
    for _ in range(40):
        n = int(rng.integers(4, 9))
        base = np.diag(np.array([0.5, 1.5, 3.0, 5.0, 7.5, 10.0, 13.0, 16.0][:n]))
        q = sla.qr(rng.standard_normal((n, n)))[0]
        d1 = q @ base @ q.T
        d2 = d1 + 0.01 * rand_psd(n, rng)
        inner2 = np.eye(n) + 0.005 * rand_psd(n, rng)
        q1 = np.eye(n) + 0.005 * rng.standard_normal((n, n))
        try:
            rep = S.eigenvector_comparison(d1, np.eye(n), d2, inner2, q1,
                                           np.linalg.inv(q1), 2, 2, 128)
        except (GapViolation, FExceedsOne):
            continue
        checked += 1
        assert rep.conclusion_ok
        assert rep.max_grid_residual <= rep.f_bound + rep.f_slack + 1e-9
    assert checked >= 20


def test_eigenvector_comparison_guards():
    form = np.diag([0.5, 1.0, 2.0, 4.0, 6.0, 9.0])
    eye = np.eye(6)
    rng = np.random.default_rng(4)
    # large perturbation makes the combined bound vacuous (or breaks the gap)
    rough = form + rand_psd(6, rng) * 5.0
    with pytest.raises((FExceedsOne, GapViolation)):
        S.eigenvector_comparison(form, eye, rough, eye, np.eye(6), np.eye(6), 2, 2, 64)


def test_grid_supremum_matches_exact_pencil():
    # the roundtrip-defect supremum over a 2-D span has an exact pencil
    # formulation; the sphere-grid estimate must land on it
    rng = np.random.default_rng(31)
    n = 6
    inner = np.eye(n)
    q1 = np.eye(n) + 0.05 * rng.standard_normal((n, n))
    q2 = np.linalg.inv(q1) + 0.02 * rng.standard_normal((n, n))
    basis = sla.qr(rng.standard_normal((n, 2)), mode="economic")[0]
    resid = (np.eye(n) - q2 @ q1) @ basis
    a3 = resid.T @ inner @ resid
    b3 = basis.T @ inner @ basis

    def obj(coefs):
        num = np.einsum("nd,de,ne->n", coefs, a3, coefs)
        den = np.einsum("nd,de,ne->n", coefs, b3, coefs)
        return np.sqrt(np.maximum(num / den, 0.0))

    grid_sup, _ = S._grid_supremum(obj, 2, 512)
    pencil = sla.eigh(a3, b3, eigvals_only=True)
    assert grid_sup == pytest.approx(math.sqrt(max(pencil)), rel=1e-4)
