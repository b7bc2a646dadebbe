"""Spin-boson model: assembly, matrix-valued singular dressing, and the
renormalized spin matrix via double operator integrals.

The composite space is (spin) tensor (truncated Fock), indexed so that the
flat index is spin_index * fock_dim + fock_index, i.e. scipy.sparse.kron
with the spin factor on the left.

The dressing attached to a configuration g is the matrix-valued lowering
exponential

    D = exp(B* (x) a(g)) = sum_k (B*)^k (x) a(g)^k / k!,

which terminates at the cap and is exactly invertible (replace g by -g).
Spectrally decomposing the normal matrix B = sum_mu mu E(mu) turns D into
sum_mu E(mu) (x) exp(conj(mu) a(g)), which is what makes every renormalized
object here a finite double sum over eigenvalue clusters of B: the metric,
the renormalized spin matrix with its chi kernel, and the dressed diagonal
of a spin operator all come out of that expansion.
"""

import math

import numpy as np
from scipy import sparse
import scipy.linalg
import scipy.sparse.linalg as spla

from . import doi
from .dressing import RenormMetric
from .fock import (annihilator, creator, exp_nilpotent, second_quantization)
from .linalg import lowest_eigenpairs
from .modes import vhm_ground_config


class SpinSpace:
    """Spin data of the model: diagonal part A, interaction matrix B.

    A must be Hermitian and B normal; the spectral decomposition of B is
    computed once and reused by every double-sum construction.
    """

    def __init__(self, A, B, tol_eig=1e-9):
        A = np.asarray(A, dtype=complex)
        B = np.asarray(B, dtype=complex)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape != B.shape:
            raise ValueError("A and B must be square matrices of equal size")
        scale = max(1.0, float(np.abs(A).max()))
        if np.abs(A - A.conj().T).max() > 1e-12 * scale:
            raise ValueError("A must be Hermitian")
        self.dim = A.shape[0]
        self.A = A
        self.B = B
        # raises on non-normal B
        self.dec_B = doi.spectral_decompose(B, tol_eig=tol_eig)
        rec = self.dec_B.reconstruct()
        if np.abs(rec - B).max() > 1e-9 * max(1.0, self.dec_B.spectral_radius):
            raise RuntimeError("spectral decomposition failed to reconstruct B")

    def __repr__(self):
        return "SpinSpace(s=%d, clusters=%d)" % (self.dim, len(self.dec_B))


def _kron(spin_mat, fock_mat):
    return sparse.kron(sparse.csr_matrix(spin_mat),
                       sparse.csr_matrix(fock_mat), format="csr")


def assemble_sb(spin, v, modes, basis):
    """H = A (x) I + I (x) dGamma(omega) + B (x) a~(v) + B* (x) a(v)."""
    v = np.asarray(v, dtype=complex)
    if len(modes) != basis.num_modes or v.shape != (basis.num_modes,):
        raise ValueError("grid, coupling vector and basis disagree on the "
                         "mode count")
    eye_s = np.eye(spin.dim)
    eye_f = sparse.identity(basis.dim, dtype=complex, format="csr")
    H = (_kron(spin.A, eye_f)
         + _kron(eye_s, second_quantization(modes.omega, basis).mat)
         + _kron(spin.B, creator(v, basis).mat)
         + _kron(spin.B.conj().T, annihilator(v, basis).mat))
    return H.tocsr()


def sb_dress_lower(spin, g, basis):
    """Matrix of exp(B* (x) a(g)); exact nilpotent series, unipotent."""
    g = np.asarray(g, dtype=complex)
    low = annihilator(g, basis).mat
    n = spin.dim * basis.dim
    acc = sparse.identity(n, dtype=complex, format="csr")
    spin_pow = np.eye(spin.dim, dtype=complex)
    fock_pow = sparse.identity(basis.dim, dtype=complex, format="csr")
    fact = 1.0
    for k in range(1, basis.cap + 1):
        spin_pow = spin_pow @ spin.B.conj().T
        fock_pow = fock_pow @ low
        fact *= k
        if fock_pow.nnz == 0 or not np.any(spin_pow):
            break
        acc = acc + _kron(spin_pow, fock_pow) / fact
    return acc.tocsr()


def sb_raise_exp(spin, g, basis):
    """Truncated matrix of exp(B (x) a~(g)).

    Unlike the lowering exponential this one is cut off by the cap, so it
    only agrees with the continuum operator on amplitudes that stay within
    the cap; identity checks against it must stay on interior sectors.
    """
    g = np.asarray(g, dtype=complex)
    up = creator(g, basis).mat
    n = spin.dim * basis.dim
    acc = sparse.identity(n, dtype=complex, format="csr")
    spin_pow = np.eye(spin.dim, dtype=complex)
    fock_pow = sparse.identity(basis.dim, dtype=complex, format="csr")
    fact = 1.0
    for k in range(1, basis.cap + 1):
        spin_pow = spin_pow @ spin.B
        fock_pow = fock_pow @ up
        fact *= k
        if fock_pow.nnz == 0 or not np.any(spin_pow):
            break
        acc = acc + _kron(spin_pow, fock_pow) / fact
    return acc.tocsr()


def sb_metric(spin, g, basis, cond_warn=1e12):
    """Renormalized metric G = D*D of the matrix-valued dressing."""
    D = sb_dress_lower(spin, g, basis)
    return RenormMetric(D, g=np.asarray(g, dtype=complex), cond_warn=cond_warn)


def _cluster_lower_exps(spin, g, basis):
    """exp(conj(mu) a(g)) for every eigenvalue cluster mu of B."""
    g = np.asarray(g, dtype=complex)
    return [exp_nilpotent(annihilator(mu * g, basis).mat, basis.cap)
            for mu in spin.dec_B.eigenvalues]


def renorm_spin_form(spin, g, basis, singular=False):
    """Gram-side matrix F of the renormalized spin-matrix form.

    F is the matrix of the sesquilinear form

        sum_{lam, mu} chi(lam, mu) <e^{conj(mu) a(g)} Xi, e^{conj(lam) a(g)} Theta>
                                   <E(lam) psi, A E(mu) phi>

    on the product basis, i.e. the renormalized operator before the Riesz
    step: the operator itself is G^{-1} F.  The regular kernel uses
    chi at |g|^2; ``singular=True`` selects the diagonal-indicator kernel
    of a configuration outside the one-particle space.
    """
    g = np.asarray(g, dtype=complex)
    gnorm2 = float(np.vdot(g, g).real)
    kernel = (doi.chi_singular(spin.dec_B) if singular
              else doi.chi_regular(gnorm2))
    dec = spin.dec_B
    exps = _cluster_lower_exps(spin, g, basis)
    n = spin.dim * basis.dim
    F = np.zeros((n, n), dtype=complex)
    # blocks below the accuracy of the spectral decomposition itself are
    # rounding noise; dropping them keeps algebraically-zero forms exactly 0
    blk_floor = 1e-13 * max(1.0, np.linalg.norm(spin.A, 2))
    for i, lam in enumerate(dec.eigenvalues):
        for j, mu in enumerate(dec.eigenvalues):
            w = kernel(lam, mu)
            if w == 0:
                continue
            spin_blk = dec.projections[i] @ spin.A @ dec.projections[j]
            if np.abs(spin_blk).max() <= blk_floor:
                continue
            fock_blk = (exps[j].conj().T @ exps[i]).toarray()
            F += w * np.kron(spin_blk, fock_blk)
    return 0.5 * (F + F.conj().T)


def renorm_spin_matrix(spin, g, basis, metric, singular=False):
    """Renormalized spin matrix on the dressed space (Riesz solve)."""
    F = renorm_spin_form(spin, g, basis, singular=singular)
    return metric.solve(F)


def dressed_diag(spin, T, g, basis):
    """Conjugated spin operator exp(-B* (x) a(g)) (T (x) I) exp(B* (x) a(g)).

    This is the transport of T (x) I from the undressed frame into the
    g frame; the conjugation is by exact unipotent matrices.
    """
    T = np.asarray(T, dtype=complex)
    D = sb_dress_lower(spin, g, basis)
    Dinv = sb_dress_lower(spin, -np.asarray(g, dtype=complex), basis)
    eye_f = sparse.identity(basis.dim, dtype=complex, format="csr")
    return (Dinv @ _kron(T, eye_f) @ D).tocsr()


def renormalized_sb(spin, v, modes, basis, g=None, singular=False,
                    metric=None):
    """Renormalized Hamiltonian in the dressed frame and its standard twin.

    Returns (H_ren, H_hat, metric):

    * H_ren = A_ren + exp(-B* (x) a(g)) (I (x) dGamma(omega)) exp(B* (x) a(g)),
      symmetric for the dressed metric G;
    * H_hat = I (x) dGamma(omega) + D^{-*} F D^{-1}, the same operator
      carried back to the standard metric, genuinely Hermitian; the two have
      equal spectra because H_hat = D H_ren D^{-1} exactly.

    g defaults to -v/omega.  ``singular`` selects the diagonal-indicator
    kernel in the renormalized spin matrix.
    """
    v = np.asarray(v, dtype=complex)
    if g is None:
        g = vhm_ground_config(v, modes)
    g = np.asarray(g, dtype=complex)
    if metric is None:
        metric = sb_metric(spin, g, basis)
    F = renorm_spin_form(spin, g, basis, singular=singular)
    eye_s = np.eye(spin.dim)
    free = _kron(eye_s, second_quantization(modes.omega, basis).mat)
    D = sb_dress_lower(spin, g, basis)
    Dinv = sb_dress_lower(spin, -g, basis)
    H_ren = metric.solve(F) + (Dinv @ free @ D).toarray()
    A_hat = Dinv.conj().T @ F @ Dinv.toarray()
    H_hat = free.toarray() + 0.5 * (A_hat + A_hat.conj().T)
    return H_ren, H_hat, metric


def counterterm(v, modes):
    """|v/sqrt(omega)|^2, the energy renormalization constant."""
    v = np.asarray(v, dtype=complex)
    omega = modes.omega
    bad = (omega == 0) & (v != 0)
    if np.any(bad):
        raise ValueError("|v/sqrt(omega)| diverges on node(s) %s"
                         % np.flatnonzero(bad))
    ok = omega > 0
    return float(np.sum(np.abs(v[ok]) ** 2 / omega[ok]))


def energy_renorm_sb(spin, v_sequence, modes, basis, z=1j, tol=1e-10, seed=0):
    """Ground energies and resolvent gaps of the counterterm-shifted family.

    For each coupling v_alpha the shifted Hamiltonian is
    H(B, v_alpha) + |v_alpha/sqrt(omega)|^2 (B*B (x) I).  Reported per
    element: its lowest eigenvalue, the counterterm, and the spectral norm
    of the resolvent difference (at shift z) to the final element.  Along a
    genuine refinement sequence the gaps should come out nonincreasing.
    """
    eye_f = sparse.identity(basis.dim, dtype=complex, format="csr")
    btb = spin.B.conj().T @ spin.B
    rows = []
    resolvents = []
    n = spin.dim * basis.dim
    for v in v_sequence:
        v = np.asarray(v, dtype=complex)
        ct = counterterm(v, modes)
        H = assemble_sb(spin, v, modes, basis) + ct * _kron(btb, eye_f)
        vals, _, _ = lowest_eigenpairs(H, k=1, tol=tol, seed=seed)
        resolvents.append(np.linalg.inv(H.toarray() + z * np.eye(n)))
        rows.append({"lambda0": float(vals[0]), "counterterm": ct})
    for row, R in zip(rows, resolvents):
        row["resolvent_gap"] = float(np.linalg.norm(R - resolvents[-1], 2))
    return rows


def pull_through_residual(spin, v, modes, basis, groundpair, pre_tol=1e-8):
    """Per-mode pull-through residuals of a converged ground pair.

    r_i = | a_i Psi + v_i (H - lambda0 + omega_i)^{-1} (B (x) I) Psi |.
    In the continuum the ground state satisfies r_i = 0 exactly; here the
    residual carries the eigensolver tolerance and the truncation tail.
    """
    lam0, psi = groundpair
    psi = np.asarray(psi, dtype=complex)
    v = np.asarray(v, dtype=complex)
    H = assemble_sb(spin, v, modes, basis)
    res = np.linalg.norm(H @ psi - lam0 * psi)
    if res > pre_tol * (abs(lam0) + 1.0):
        raise ValueError("ground pair is not converged: residual %.3g" % res)
    eye_s = sparse.identity(spin.dim, dtype=complex, format="csr")
    eye_f = sparse.identity(basis.dim, dtype=complex, format="csr")
    rhs = _kron(sparse.csr_matrix(spin.B), eye_f) @ psi
    omega = modes.omega
    out = np.empty(basis.num_modes)
    n = spin.dim * basis.dim
    for i in range(basis.num_modes):
        e_i = np.zeros(basis.num_modes)
        e_i[i] = 1.0
        a_i = sparse.kron(eye_s, annihilator(e_i, basis).mat, format="csc")
        shifted = (H - (lam0 - omega[i]) * sparse.identity(n, dtype=complex,
                                                           format="csr"))
        x = spla.spsolve(shifted.tocsc(), rhs)
        out[i] = np.linalg.norm(a_i @ psi + v[i] * x)
    return out


def sb_field(spin, g, f, basis, kind="position"):
    """Interacting field of the dressed spin-boson representation.

    Transport of the free field I (x) phi0(f) into the g frame, plus the
    classical shift sqrt2 Re<g, f> B*B (x) I (or the imaginary part for the
    conjugate momentum).  Changing frames from g' to g shifts the field by
    sqrt2 Re<g - g', f> B*B (x) I, which is the quantitative statement that
    the representations stop being unitarily equivalent when g - g' leaves
    the one-particle space.
    """
    g = np.asarray(g, dtype=complex)
    f = np.asarray(f, dtype=complex)
    up = creator(f, basis).mat
    down = annihilator(f, basis).mat
    pair = complex(np.vdot(g, f))
    if kind == "position":
        base = (up + down) / math.sqrt(2.0)
        shift = math.sqrt(2.0) * pair.real
    elif kind == "momentum":
        base = (up - down) / (1j * math.sqrt(2.0))
        shift = math.sqrt(2.0) * pair.imag
    else:
        raise ValueError("kind must be 'position' or 'momentum'")
    eye_s = np.eye(spin.dim)
    btb = spin.B.conj().T @ spin.B
    core = _kron(eye_s, base) + shift * _kron(btb, sparse.identity(
        basis.dim, dtype=complex, format="csr"))
    D = sb_dress_lower(spin, g, basis)
    Dinv = sb_dress_lower(spin, -g, basis)
    return (Dinv @ core @ D).tocsr()


def sb_mollified_inner_check(psi, phi, spin, g, basis, metric):
    """Mollified route to the dressed inner product, spin-boson version.

    Applies M = (exp(-B*B |g|^2 / 2) (x) I) exp(B (x) a~(g)) to both
    vectors; <M psi, M phi> reproduces <psi, phi>_G up to the truncation
    tail of the raising exponential.  Inputs must be supported on grades
    at most cap/2.  Returns (direct, mollified, |difference|).
    """
    g = np.asarray(g, dtype=complex)
    psi = np.asarray(psi, dtype=complex)
    phi = np.asarray(phi, dtype=complex)
    half = basis.cap // 2
    grade_of = np.repeat(basis.grades[None, :], spin.dim, axis=0).ravel()
    hi = grade_of > half
    bad = max(float(np.abs(psi[hi]).max(initial=0.0)),
              float(np.abs(phi[hi]).max(initial=0.0)))
    if bad > 0:
        raise ValueError("mollified comparison needs inputs supported on "
                         "grades <= %d; found mass %.3g above" % (half, bad))
    gnorm2 = float(np.vdot(g, g).real)
    btb = spin.B.conj().T @ spin.B
    damp = scipy.linalg.expm(-0.5 * gnorm2 * btb)
    M = _kron(damp, sparse.identity(basis.dim, dtype=complex,
                                    format="csr")) @ sb_raise_exp(spin, g,
                                                                  basis)
    direct = metric.inner(psi, phi)
    mollified = complex(np.vdot(M @ psi, M @ phi))
    return direct, mollified, abs(direct - mollified)
