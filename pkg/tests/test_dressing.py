import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from renormfock import dressing, fock, modes


def _rand_complex(rng, n, scale=1.0):
    return scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


def _interior_vec(rng, basis, budget):
    v = np.zeros(basis.dim, dtype=complex)
    m = basis.grades <= budget
    v[m] = _rand_complex(rng, int(m.sum()))
    return v / np.linalg.norm(v)


def test_dress_lower_fixes_vacuum():
    b = fock.enumerate_basis(2, 4)
    rng = np.random.default_rng(0)
    D = dressing.dress_lower(_rand_complex(rng, 2), b)
    assert np.allclose(D.apply(b.vacuum()), b.vacuum())


def test_dress_lower_hand_series():
    # single mode, g = 1: the series on |2> reads |2> + sqrt2 |1> + (1/sqrt2) vac
    b = fock.enumerate_basis(1, 3)
    D = dressing.dress_lower(np.array([1.0 + 0j]), b)
    vec = np.zeros(b.dim, dtype=complex)
    vec[b.index[(2,)]] = 1.0
    out = D.apply(vec)
    assert out[b.index[(2,)]] == pytest.approx(1.0)
    assert out[b.index[(1,)]] == pytest.approx(math.sqrt(2.0))
    assert out[b.index[(0,)]] == pytest.approx(1.0 / math.sqrt(2.0))
    assert out[b.index[(3,)]] == 0.0


def test_dress_lower_unipotent_structure():
    b = fock.enumerate_basis(2, 5)
    rng = np.random.default_rng(1)
    D = dressing.dress_lower(_rand_complex(rng, 2), b).mat.tocoo()
    off = b.grades[D.row] - b.grades[D.col]
    assert np.all(off <= 0)
    diag = D.tocsr().diagonal()
    assert np.allclose(diag, 1.0)


def test_annihilator_nilpotent():
    b = fock.enumerate_basis(2, 4)
    rng = np.random.default_rng(2)
    a = fock.annihilator(_rand_complex(rng, 2), b).mat
    power = a ** (b.cap + 1)
    assert power.nnz == 0 or np.abs(power.data).max() == 0.0


def test_eigenrelation_gradewise_partial_sums():
    # on the truncation the eigenrelation picks up a grade-dependent partial
    # exponential sum: component at grade m of exp(a(g)) eps(f) equals
    # eps_m(f) * sum_{k <= cap-m} <g,f>^k / k!, exactly
    b = fock.enumerate_basis(2, 6)
    rng = np.random.default_rng(3)
    g = _rand_complex(rng, 2)
    f = _rand_complex(rng, 2)
    ef, _ = fock.exponential_vector(f, b)
    out = dressing.dress_lower(g, b).apply(ef)
    z = np.vdot(g, f)
    for m in range(b.cap + 1):
        partial = sum(z ** k / math.factorial(k) for k in range(b.cap - m + 1))
        idx = b.grade_indices(m)
        scale = max(1.0, np.abs(ef[idx] * partial).max())
        assert np.abs(out[idx] - ef[idx] * partial).max() <= 1e-12 * scale
    # low grades cannot tell the partial sum from the full exponential
    lo = b.grades <= 2
    assert np.abs(out[lo] - np.exp(z) * ef[lo]).max() <= \
        fock.exp_tail(abs(z), b.cap - 2) * np.abs(ef[lo]).max() + 1e-12


def test_metric_identity_at_zero():
    b = fock.enumerate_basis(2, 3)
    met = dressing.renorm_metric(np.zeros(2), b)
    assert np.abs(met.gram - np.eye(b.dim)).max() == 0.0
    assert met.cond == pytest.approx(1.0)


def test_metric_two_by_two_oracle():
    # M=1, cap=1, g = gamma: D = [[1, conj(gamma)], [0, 1]]
    gamma = 0.7 - 0.4j
    b = fock.enumerate_basis(1, 1)
    met = dressing.renorm_metric(np.array([gamma]), b)
    want = np.array([[1.0, np.conj(gamma)],
                     [gamma, 1.0 + abs(gamma) ** 2]])
    assert np.abs(met.gram - want).max() < 1e-15
    assert np.linalg.det(met.gram).real == pytest.approx(1.0, abs=1e-12)


def test_metric_determinant_and_cholesky():
    b = fock.enumerate_basis(3, 4)
    rng = np.random.default_rng(4)
    met = dressing.renorm_metric(_rand_complex(rng, 3), b)
    det = np.linalg.det(met.gram)
    assert abs(det - 1.0) < 1e-9
    recon = met.chol @ met.chol.conj().T
    assert np.abs(recon - met.gram).max() < 1e-10 * np.abs(met.gram).max()


def test_metric_condition_warning():
    b = fock.enumerate_basis(1, 10)
    with pytest.warns(UserWarning, match="condition"):
        dressing.renorm_metric(np.array([3.5 + 0j]), b)


def test_metric_spectrum_rejects_asymmetric():
    b = fock.enumerate_basis(1, 3)
    met = dressing.renorm_metric(np.array([0.5 + 0j]), b)
    bad = np.diag(np.arange(b.dim, dtype=float))  # Hermitian but not G-symmetric
    with pytest.raises(ValueError, match="symmetric"):
        met.spectrum(bad)


def test_transfer_identity_and_inverse():
    b = fock.enumerate_basis(2, 4)
    rng = np.random.default_rng(5)
    g = _rand_complex(rng, 2)
    g2 = _rand_complex(rng, 2)
    eye = dressing.transfer(g, g, b).mat
    assert np.abs(eye - np.eye(b.dim)).max() == 0.0
    prod = dressing.transfer(g2, g, b).mat @ dressing.transfer(g, g2, b).mat
    assert np.abs(prod - np.eye(b.dim)).max() < 1e-12


@settings(max_examples=15, deadline=None, derandomize=True)
@given(st.integers(0, 2 ** 32 - 1))
def test_transfer_composition_law(seed):
    rng = np.random.default_rng(seed)
    b = fock.enumerate_basis(2, 4)
    ga, gb, gc = (_rand_complex(rng, 2) for _ in range(3))
    lhs = dressing.transfer(gb, gc, b).mat @ dressing.transfer(ga, gb, b).mat
    rhs = dressing.transfer(ga, gc, b).mat
    scale = max(1.0, np.abs(rhs.toarray()).max())
    assert np.abs((lhs - rhs).toarray()).max() < 1e-12 * scale


def test_transfer_isometry_between_metrics():
    b = fock.enumerate_basis(3, 4)
    rng = np.random.default_rng(6)
    g = _rand_complex(rng, 3)
    g2 = _rand_complex(rng, 3)
    U = dressing.transfer(g, g2, b).mat
    G1 = dressing.renorm_metric(g, b).gram
    G2 = dressing.renorm_metric(g2, b).gram
    diff = U.conj().T @ G2 @ U - G1
    assert np.abs(diff).max() < 1e-10 * np.abs(G1).max()


def test_transfer_eigenrelation():
    b = fock.enumerate_basis(2, 6)
    rng = np.random.default_rng(7)
    g = _rand_complex(rng, 2, scale=0.5)
    g2 = _rand_complex(rng, 2, scale=0.5)
    f = _rand_complex(rng, 2, scale=0.5)
    ef, _ = fock.exponential_vector(f, b)
    out = dressing.transfer(g, g2, b).apply(ef)
    z = np.vdot(g - g2, f)
    for m in range(b.cap + 1):
        partial = sum(z ** k / math.factorial(k) for k in range(b.cap - m + 1))
        idx = b.grade_indices(m)
        assert np.abs(out[idx] - ef[idx] * partial).max() <= 1e-12


def test_mollified_check_trivial_cases():
    b = fock.enumerate_basis(1, 8)
    g = np.array([0.8 + 0j])
    met = dressing.renorm_metric(g, b)
    d, m, gap = dressing.mollified_inner_check(b.vacuum(), b.vacuum(), g, met)
    assert d == pytest.approx(1.0) and m == pytest.approx(1.0)
    assert gap < 1e-14
    rng = np.random.default_rng(8)
    met0 = dressing.renorm_metric(np.zeros(1), b)
    psi = _interior_vec(rng, b, 3)
    phi = _interior_vec(rng, b, 3)
    d, m, gap = dressing.mollified_inner_check(psi, phi, np.zeros(1), met0)
    assert d == pytest.approx(np.vdot(psi, phi))
    assert gap < 1e-14


def test_mollified_check_budget_enforced():
    b = fock.enumerate_basis(1, 8)
    g = np.array([0.5 + 0j])
    met = dressing.renorm_metric(g, b)
    hi = np.zeros(b.dim, dtype=complex)
    hi[b.index[(7,)]] = 1.0
    with pytest.raises(ValueError, match="grades"):
        dressing.mollified_inner_check(hi, b.vacuum(), g, met)


def test_mollified_gap_within_computed_bound():
    b = fock.enumerate_basis(1, 16)
    g = np.array([1.0 + 0j])
    met = dressing.renorm_metric(g, b)
    rng = np.random.default_rng(11)
    for budget in (1, 2, 4):
        psi = _interior_vec(rng, b, budget)
        phi = _interior_vec(rng, b, budget)
        direct, _, gap = dressing.mollified_inner_check(psi, phi, g, met)
        bound = dressing.mollified_gap_bound(1.0, b.cap, budget, budget,
                                             1.0, 1.0, abs(direct))
        assert gap <= bound
    # near-vacuum support realizes the advertised 1e-10 scale
    psi = _interior_vec(rng, b, 2)
    phi = _interior_vec(rng, b, 2)
    _, _, gap = dressing.mollified_inner_check(psi, phi, g, met)
    assert gap <= 1e-10


def test_raising_tail_bound_basics():
    assert dressing.raising_tail_bound(0.0, 10, 0) == 0.0
    with pytest.raises(ValueError):
        dressing.raising_tail_bound(-1.0, 10, 0)
    # grows with the support grade, shrinks with the cap
    t0 = dressing.raising_tail_bound(1.0, 16, 0)
    t3 = dressing.raising_tail_bound(1.0, 16, 3)
    t3big = dressing.raising_tail_bound(1.0, 24, 3)
    assert 0.0 < t0 < t3
    assert t3big < t3


def test_interacting_field_at_zero():
    b = fock.enumerate_basis(2, 4)
    rng = np.random.default_rng(9)
    f = _rand_complex(rng, 2)
    phi = dressing.interacting_field(np.zeros(2), f, b).mat
    want = (fock.creator(f, b).mat + fock.annihilator(f, b).mat) / math.sqrt(2)
    assert np.abs((phi - want).toarray()).max() < 1e-14


def test_interacting_field_vacuum_shift():
    b = fock.enumerate_basis(2, 8)
    rng = np.random.default_rng(10)
    g = _rand_complex(rng, 2, scale=0.5)
    f = _rand_complex(rng, 2)
    met = dressing.renorm_metric(g, b)
    vac = b.vacuum()
    pos = dressing.interacting_field(g, f, b, "position")
    mom = dressing.interacting_field(g, f, b, "momentum")
    assert met.inner(vac, pos.apply(vac)) == pytest.approx(
        math.sqrt(2.0) * np.vdot(g, f).real, abs=1e-12)
    assert met.inner(vac, mom.apply(vac)) == pytest.approx(
        math.sqrt(2.0) * np.vdot(g, f).imag, abs=1e-12)
    # symmetric for the dressed metric
    assert met.herm_defect(pos.mat) < 1e-12 * np.abs(met.gram).max()
    with pytest.raises(ValueError):
        dressing.interacting_field(g, f, b, kind="bogus")


def test_interacting_field_commutator_invariance():
    b = fock.enumerate_basis(2, 8)
    rng = np.random.default_rng(12)
    g = _rand_complex(rng, 2, scale=0.5)
    f = _rand_complex(rng, 2)
    h = _rand_complex(rng, 2)
    phi_g = dressing.interacting_field(g, f, b, "position").mat.toarray()
    pi_g = dressing.interacting_field(g, h, b, "momentum").mat.toarray()
    phi_0 = dressing.interacting_field(np.zeros(2), f, b, "position").mat.toarray()
    pi_0 = dressing.interacting_field(np.zeros(2), h, b, "momentum").mat.toarray()
    left = dressing.dress_lower(-g, b).mat.toarray()
    right = dressing.dress_lower(g, b).mat.toarray()
    lhs = phi_g @ pi_g - pi_g @ phi_g
    rhs = left @ (phi_0 @ pi_0 - pi_0 @ phi_0) @ right
    assert np.abs(lhs - rhs).max() < 1e-12


def test_injectivity_reported_value():
    b = fock.enumerate_basis(1, 12)
    D = dressing.dress_lower(np.array([2.0 + 0j]), b).mat.toarray()
    smin = np.linalg.svd(D, compute_uv=False).min()
    assert smin > 1e-3  # measured 4.57e-3 at |g|^2 = 4, cap 12


def test_representation_distance_trivial():
    g = np.array([0.3 + 0.4j, -1.0])
    gap, overlap = dressing.representation_distance(g, g)
    assert gap == 0.0 and overlap == 1.0


def test_representation_distance_ir_refinement():
    # 1/sqrt(omega) coupling: |g|^2 grows like log(1/sigma0), so the window
    # refinement drives the frames apart; the grid value must match an
    # independent quadrature of |g(k)|^2 = 1/k^3 over the window
    ms = modes.log_grid(3, 1e-3, 4.0, 48)
    gaps, overlaps = [], []
    for s0 in (0.4, 0.2, 0.1, 0.05):
        spec = modes.FormFactorSpec("weisskopf_wigner", sigma=2.0, sigma0=s0)
        v = modes.sample_form_factor(spec, ms)
        g = modes.vhm_ground_config(v, ms)
        gap, overlap = dressing.representation_distance(g, np.zeros(len(ms)))
        oracle = sum(ms.weights[i] / ms.kmag[i] ** 3
                     for i in range(len(ms)) if s0 <= ms.kmag[i] <= 2.0)
        assert gap == pytest.approx(oracle, rel=1e-12)
        gaps.append(gap)
        overlaps.append(overlap)
    assert all(a < b for a, b in zip(gaps, gaps[1:]))
    assert all(a > b for a, b in zip(overlaps, overlaps[1:]))


def test_ir_catastrophe_coherent_sequence():
    b = fock.enumerate_basis(1, 40)
    N = fock.number_operator(b).mat
    rng = np.random.default_rng(13)
    probe = _interior_vec(rng, b, 2)  # fixed finite-grade observer
    overlaps, numbers = [], []
    for x in (1.0, 2.0, 4.0):
        g = np.array([math.sqrt(x) + 0j])
        c = fock.coherent_state(g, b)
        overlaps.append(abs(np.vdot(c, probe)))
        numbers.append(float(np.vdot(c, N @ c).real))
        assert numbers[-1] == pytest.approx(x, abs=1e-8)
    assert overlaps[0] > overlaps[1] > overlaps[2]
    assert numbers[0] < numbers[1] < numbers[2]


def test_metric_tail_bound():
    b = fock.enumerate_basis(1, 16)
    g = np.array([1.0 + 0j])
    want = fock.exp_tail(1.0, 16) * math.exp(-1.0)
    assert dressing.metric_tail_bound(g, b) == pytest.approx(want, rel=1e-12)
    assert dressing.metric_tail_bound(np.zeros(1), b) == 0.0
