"""Singular dressing transformations and renormalized inner products.

The dressing attached to a configuration vector g is the lower-triangular
(in the grading) operator exp(a(g)).  On the truncated space its series
terminates, it is unipotent with unit determinant, and it is injective, so
the pulled-back metric G = D* D is positive definite and admits a Cholesky
factorization.  G turns the plain coordinate space into a model of the
renormalized representation: vectors keep their coordinates, only the inner
product changes.

Operators X acting on the renormalized space are handled through whitening,
X -> L* X L^{-*} with G = L L*, which is a similarity, so spectra computed
in the whitened frame are the metric-correct ones.

Transfers between two dressed representations compose out of the same
exponentials: the matrix of the identification from the g' frame to the g
frame is exp(a(g - g')), and these satisfy the group law exactly because
the exponents are commuting lowering operators.
"""

import math
import warnings

import numpy as np
from scipy import sparse
import scipy.linalg

from .fock import (FockOperator, annihilator, creator, exp_nilpotent,
                   exp_tail, _check_coeff)
from .linalg import hermitian_defect


def dress_lower(g, basis):
    """Matrix of exp(a(g)): unipotent, grade-lowering, det = 1."""
    g = _check_coeff(g, basis)
    return FockOperator(basis, exp_nilpotent(annihilator(g, basis).mat,
                                             basis.cap))


def transfer(g, g2, basis):
    """Identification operator from the g2 frame into the g frame.

    Its matrix is exp(a(g - g2)); the three-frame composition law and
    inversion hold exactly on the truncated space.
    """
    g = _check_coeff(g, basis)
    g2 = _check_coeff(g2, basis)
    return dress_lower(g - g2, basis)


class RenormMetric:
    """Gram matrix machinery for a dressed representation.

    Parameters
    ----------
    dressing : sparse or dense square matrix
        The injective dressing D; the metric is G = D* D.
    g : array, optional
        The configuration that produced D, kept for bookkeeping.
    basis : FockBasis, optional
        Underlying basis when D lives on a plain Fock space.
    cond_warn : float
        Warn when the metric condition number passes this.
    """

    def __init__(self, dressing, g=None, basis=None, cond_warn=1e12):
        D = sparse.csr_matrix(dressing)
        G = (D.conj().T @ D).toarray()
        G = 0.5 * (G + G.conj().T)
        try:
            L = scipy.linalg.cholesky(G, lower=True)
        except scipy.linalg.LinAlgError as exc:
            raise ValueError("dressing produced a non positive definite "
                             "metric; it is numerically singular") from exc
        self.dressing = D
        self.gram = G
        self.chol = L
        self.g = None if g is None else np.asarray(g, dtype=complex)
        self.basis = basis
        self.cond = float(np.linalg.cond(G))
        if self.cond > cond_warn:
            warnings.warn("renormalized metric condition number %.3g; "
                          "results may be unreliable" % self.cond,
                          stacklevel=2)

    @property
    def dim(self):
        return self.gram.shape[0]

    def inner(self, psi, phi):
        """Renormalized pairing <psi, phi>_G, antilinear in psi."""
        return complex(np.vdot(psi, self.gram @ phi))

    def norm(self, psi):
        val = self.inner(psi, psi).real
        return math.sqrt(max(val, 0.0))

    def solve(self, rhs):
        """Apply G^{-1} via the Cholesky factor (Riesz representation)."""
        return scipy.linalg.cho_solve((self.chol, True), rhs)

    def whiten(self, X):
        """Similarity L* X L^{-*} mapping G-geometry to euclidean geometry.

        G-Hermitian X become genuinely Hermitian here, G-isometries become
        unitary, and spectra are unchanged.
        """
        if sparse.issparse(X):
            X = X.toarray()
        right = scipy.linalg.solve_triangular(self.chol, X.conj().T,
                                              lower=True)
        return self.chol.conj().T @ right.conj().T

    def herm_defect(self, X):
        """max |G X - (G X)*|: zero iff X is symmetric for the G pairing."""
        if sparse.issparse(X):
            X = X.toarray()
        return hermitian_defect(self.gram @ X)

    def spectrum(self, X, herm_tol=1e-8):
        """Eigenvalues of a G-Hermitian operator, via the whitened frame."""
        scale = max(1.0, float(np.max(np.abs(self.gram))))
        defect = self.herm_defect(X)
        if defect > herm_tol * scale:
            raise ValueError("operator is not symmetric for this metric "
                             "(defect %.3g)" % defect)
        W = self.whiten(X)
        return scipy.linalg.eigvalsh(0.5 * (W + W.conj().T))


def renorm_metric(g, basis, cond_warn=1e12):
    """Metric of the representation dressed by exp(a(g))."""
    D = dress_lower(g, basis)
    return RenormMetric(D.mat, g=np.asarray(g, dtype=complex), basis=basis,
                        cond_warn=cond_warn)


def representation_distance(g, g2):
    """Squared configuration gap and the overlap scale it induces.

    Returns (|g - g2|^2, exp(-|g - g2|^2 / 2)).  The second number is the
    vacuum overlap of the two dressed representations; it decays to zero as
    the configurations separate, which is the quantitative face of them
    becoming disjoint in the removal limit.
    """
    d = np.asarray(g, dtype=complex) - np.asarray(g2, dtype=complex)
    gap = float(np.vdot(d, d).real)
    return gap, math.exp(-0.5 * gap)


def mollified_inner_check(psi, phi, g, metric):
    """Cross-check of the renormalized pairing against a mollified form.

    For vectors supported on grades at most cap/2, the pairing
    <psi, phi>_G can also be computed by applying the truncated raising
    exponential T = exp(a~(g)) to both vectors and dividing by the partial
    exponential sum of |g|^2; the two routes agree up to the exponential
    series tail.  Returns (direct, mollified, |difference|).
    """
    basis = metric.basis
    if basis is None:
        raise ValueError("metric carries no basis; build it via renorm_metric")
    g = _check_coeff(g, basis)
    psi = np.asarray(psi, dtype=complex)
    phi = np.asarray(phi, dtype=complex)
    half = basis.cap // 2
    hi = basis.grades > half
    bad = max(float(np.abs(psi[hi]).max(initial=0.0)),
              float(np.abs(phi[hi]).max(initial=0.0)))
    if bad > 0:
        raise ValueError(
            "mollified comparison needs inputs supported on grades <= %d; "
            "found mass %.3g above" % (half, bad))
    direct = metric.inner(psi, phi)
    T = exp_nilpotent(creator(g, basis).mat, basis.cap)
    x = float(np.vdot(g, g).real)
    partial = sum(x ** n / math.factorial(n) for n in range(basis.cap + 1))
    mollified = complex(np.vdot(T @ psi, T @ phi)) / partial
    return direct, mollified, abs(direct - mollified)


def raising_tail_bound(x, cap, support_grade):
    """Norm tail of the truncated raising exponential.

    For a unit vector at grade n0 = support_grade, the continuum vector
    exp(a~(g)) psi carries amplitude at grade n0 + k bounded by
    x^{k/2} sqrt((n0+k)!/n0!) / k! with x = |g|^2; this sums those bounds
    over the grades the cap discards (k > cap - n0).  Evaluated in log
    space.
    """
    if x < 0:
        raise ValueError("x must be nonnegative")
    if x == 0:
        return 0.0
    n0 = int(support_grade)
    total = 0.0
    lgn0 = math.lgamma(n0 + 1)
    for k in range(max(cap - n0 + 1, 0), cap - n0 + 400):
        if k == 0:
            continue
        log_t = (0.5 * k * math.log(x)
                 + 0.5 * (math.lgamma(n0 + k + 1) - lgn0)
                 - math.lgamma(k + 1))
        t = math.exp(log_t) if log_t < 700 else math.inf
        total += t
        if t < total * 1e-18:
            break
    return total


def mollified_gap_bound(gnorm2, cap, grade1, grade2, norm1, norm2,
                        inner_abs):
    """Complete computable bound for the mollified-pairing gap.

    Two error sources: the mismatch between the full exponential series of
    |g|^2 and its partial sum (weighted by the true pairing), and the
    amplitude both raised vectors lose above the cap.  All terms are the
    caller's own data plus the two series tails.
    """
    partial = sum(gnorm2 ** n / math.factorial(n) for n in range(cap + 1))
    tau1 = raising_tail_bound(gnorm2, cap, grade1) * norm1
    tau2 = raising_tail_bound(gnorm2, cap, grade2) * norm2
    return (inner_abs * exp_tail(gnorm2, cap) + tau1 * tau2) / partial


def interacting_field(g, f, basis, kind="position"):
    """Dressed field operator for test vector f in the g representation.

    kind "position" conjugates (a~(f) + a(f)) / sqrt2 shifted by
    sqrt2 Re<g, f>; kind "momentum" conjugates (a~(f) - a(f)) / (i sqrt2)
    shifted by sqrt2 Im<g, f>.  Both are symmetric for the g metric, and
    their dressed-vacuum expectations are exactly the shifts.
    """
    g = _check_coeff(g, basis)
    f = _check_coeff(f, basis)
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
    core = base + shift * sparse.identity(basis.dim, dtype=complex,
                                          format="csr")
    left = exp_nilpotent(annihilator(-g, basis).mat, basis.cap)
    right = exp_nilpotent(annihilator(g, basis).mat, basis.cap)
    return FockOperator(basis, left @ core @ right)


def metric_tail_bound(g, basis):
    """Normalized exponential tail of |g|^2 at the cap.

    This is the probability mass a coherent vector for g would lose to
    truncation; it calibrates how much of the dressed geometry the cap
    actually captures.
    """
    x = float(np.vdot(np.asarray(g, dtype=complex),
                      np.asarray(g, dtype=complex)).real)
    t = exp_tail(x, basis.cap)
    return t * math.exp(-x) if math.isfinite(t) else 1.0
