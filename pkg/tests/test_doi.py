import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from renormfock import doi

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def _random_normal(rng, n, eigs=None):
    q, _ = np.linalg.qr(rng.standard_normal((n, n))
                        + 1j * rng.standard_normal((n, n)))
    if eigs is None:
        eigs = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return q @ np.diag(eigs) @ q.conj().T, np.asarray(eigs, dtype=complex)


def test_decompose_identity():
    dec = doi.spectral_decompose(np.eye(3))
    assert len(dec) == 1
    assert dec.eigenvalues[0] == pytest.approx(1.0)
    assert np.abs(dec.projections[0] - np.eye(3)).max() < 1e-14


def test_decompose_pauli_x():
    dec = doi.spectral_decompose(SX)
    vals = sorted(dec.eigenvalues.real)
    assert vals == pytest.approx([-1.0, 1.0])
    for lam, proj in zip(dec.eigenvalues, dec.projections):
        want = (np.eye(2) + np.sign(lam.real) * SX) / 2
        assert np.abs(proj - want).max() < 1e-12


def test_decompose_invariants():
    rng = np.random.default_rng(7)
    B, _ = _random_normal(rng, 4)
    dec = doi.spectral_decompose(B)
    assert np.abs(sum(dec.projections) - np.eye(4)).max() < 1e-12
    for i, Pi in enumerate(dec.projections):
        for j, Pj in enumerate(dec.projections):
            want = Pi if i == j else 0.0
            assert np.abs(Pi @ Pj - want).max() < 1e-12
    rel = np.linalg.norm(dec.reconstruct() - B, 2) / np.linalg.norm(B, 2)
    assert rel < 1e-10


@settings(max_examples=15, deadline=None, derandomize=True)
@given(st.integers(0, 2**32 - 1))
def test_decompose_reconstructs(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 6))
    B, _ = _random_normal(rng, n)
    dec = doi.spectral_decompose(B)
    assert np.linalg.norm(dec.reconstruct() - B, 2) <= \
        1e-10 * max(np.linalg.norm(B, 2), 1.0)


def test_decompose_clusters_near_eigenvalues():
    B = np.diag([1.0, 1.0 + 1e-12, 2.0]).astype(complex)
    dec = doi.spectral_decompose(B, tol_eig=1e-9)
    assert len(dec) == 2
    ranks = sorted(int(round(p.trace().real)) for p in dec.projections)
    assert ranks == [1, 2]


def test_decompose_rejects_bad_input():
    with pytest.raises(ValueError, match="square"):
        doi.spectral_decompose(np.zeros((2, 3)))
    with pytest.raises(ValueError, match="normal"):
        doi.spectral_decompose(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_chi_regular_limits():
    ker = doi.chi_regular(0.0)
    assert ker(0.3 + 1j, -2.0) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        doi.chi_regular(-1.0)
    # off-diagonal magnitude is exactly e^{-|lam-mu|^2 x / 2}
    pts = [0.3 + 0.1j, -1.2, 0.5j, 2.0 - 0.4j]
    for x in (1.0, 10.0, 100.0):
        k = doi.chi_regular(x)
        for lam in pts:
            for mu in pts:
                want = 1.0 if lam == mu else 0.0
                decay = np.exp(-0.5 * abs(lam - mu) ** 2 * x)
                assert abs(k(lam, mu) - want) <= decay + 1e-15


def test_chi_singular_is_indicator():
    dec = doi.spectral_decompose(SZ)
    ker = doi.chi_singular(dec)
    assert ker(1.0, 1.0) == 1.0
    assert ker(1.0, -1.0) == 0.0
    assert ker(1.0, 1.0 + dec.tol_abs / 2) == 1.0


def test_doi_apply_constant_kernel():
    rng = np.random.default_rng(7)
    B, _ = _random_normal(rng, 4)
    dec = doi.spectral_decompose(B)
    A = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    ones = doi.DOIKernel("custom", lambda lam, mu: 1.0)
    assert np.abs(doi.doi_apply(A, dec, ones) - A).max() < 1e-12


def test_doi_apply_offdiagonal_killed():
    dec = doi.spectral_decompose(SX)
    out = doi.doi_apply(SZ, dec, doi.chi_singular(dec))
    assert np.abs(out).max() < 1e-14


def test_doi_apply_multiplication_kernel():
    dec = doi.spectral_decompose(SZ)
    prod = doi.DOIKernel("custom", lambda lam, mu: lam * mu)
    assert np.abs(doi.doi_apply(SZ, dec, prod) - SZ).max() < 1e-14


def test_doi_apply_shape_error():
    dec = doi.spectral_decompose(SZ)
    with pytest.raises(ValueError, match="shape"):
        doi.doi_apply(np.eye(3), dec, doi.chi_regular(0.0))


def test_doi_apply_commuting_blocks():
    rng = np.random.default_rng(7)
    q, _ = np.linalg.qr(rng.standard_normal((4, 4))
                        + 1j * rng.standard_normal((4, 4)))
    eigs = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    B = q @ np.diag(eigs) @ q.conj().T
    A = q @ np.diag(rng.standard_normal(4)) @ q.conj().T
    assert np.abs(A @ B - B @ A).max() < 1e-12
    dec = doi.spectral_decompose(B)
    out = doi.doi_apply(A, dec, doi.chi_singular(dec))
    assert np.abs(out - A).max() < 1e-12


def test_decomposability_zero_and_identity():
    rng = np.random.default_rng(7)
    B, _ = _random_normal(rng, 4)
    dec = doi.spectral_decompose(B)
    assert doi.decomposability_norm(np.zeros((4, 4)), dec, dec) == 0.0
    val = doi.decomposability_norm(np.eye(4), dec, dec)
    assert val == pytest.approx(1.0, abs=1e-9)


def test_decomposability_within_hilbert_schmidt():
    rng = np.random.default_rng(11)
    for _ in range(6):
        n = int(rng.integers(3, 5))
        B1, _ = _random_normal(rng, n)
        B2, _ = _random_normal(rng, n)
        d1 = doi.spectral_decompose(B1)
        d2 = doi.spectral_decompose(B2)
        T = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        val = doi.decomposability_norm(T, d1, d2, samples=4, iters=40)
        assert val <= np.linalg.norm(T, "fro") + 1e-9
        assert val > 0


def test_decomposability_shape_error():
    dec = doi.spectral_decompose(SZ)
    with pytest.raises(ValueError, match="shape"):
        doi.decomposability_norm(np.eye(3), dec, dec)


def test_form_bound():
    # |<psi, doi(A) phi>| <= decomposability_norm(A) * sup|f| on unit vectors
    rng = np.random.default_rng(13)
    B, _ = _random_normal(rng, 4)
    dec = doi.spectral_decompose(B)
    A = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    res = doi.doi_apply(A, dec, doi.chi_regular(0.7))
    nrm = doi.decomposability_norm(A, dec, dec, samples=6)
    for _ in range(30):
        psi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        phi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        psi /= np.linalg.norm(psi)
        phi /= np.linalg.norm(phi)
        assert abs(np.vdot(psi, res @ phi)) <= nrm + 1e-9
