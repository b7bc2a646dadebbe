"""Truncated bosonic Fock space over a finite mode set.

Basis states are occupation tuples (n_1, ..., n_M) with n_1 + ... + n_M
bounded by a total-number cap.  Enumeration is graded: ascending total boson
number, lexicographic within each grade, so the vacuum always sits at index 0
and the dimension is binom(M + cap, cap).

Truncation policy: raising operators silently drop any amplitude that would
leave the cap.  With that convention creator(f) is exactly the conjugate
transpose of annihilator(f), second quantizations stay Hermitian for
Hermitian one-particle input, and canonical commutation identities hold
exactly on interior states (those kept a safe number of grades below the
cap).  Quantitative truncation error for coherent-type vectors is controlled
by the exponential series tail, exposed here as exp_tail.

Coefficient conventions: a(f) is antilinear in f (it contracts with
conj(f_i)), a~(f) := creator(f) is linear, matching inner products that are
antilinear in the first slot.
"""

import math
import warnings

import numpy as np
from scipy import sparse


def _tuples_summing(total, parts):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _tuples_summing(total - first, parts - 1):
            yield (first,) + rest


class FockBasis:
    """Graded enumeration of bounded occupation tuples.

    Parameters
    ----------
    num_modes : int
        M >= 1, number of one-particle modes.
    cap : int
        Largest allowed total boson number, >= 0.
    max_dim : int
        Budget guard; enumeration refuses to build a basis larger than this.
    """

    def __init__(self, num_modes, cap, max_dim=500_000):
        if num_modes < 1:
            raise ValueError("need at least one mode")
        if cap < 0:
            raise ValueError("cap must be nonnegative")
        dim = math.comb(num_modes + cap, cap)
        if dim > max_dim:
            raise ValueError(
                "basis dimension %d exceeds the budget max_dim=%d "
                "(num_modes=%d, cap=%d)" % (dim, max_dim, num_modes, cap))
        states = []
        for grade in range(cap + 1):
            states.extend(_tuples_summing(grade, num_modes))
        assert len(states) == dim
        self.num_modes = int(num_modes)
        self.cap = int(cap)
        self.dim = dim
        self.states = states
        self.index = {s: i for i, s in enumerate(states)}
        self.grades = np.fromiter((sum(s) for s in states), dtype=np.int64,
                                  count=dim)

    def __len__(self):
        return self.dim

    def __repr__(self):
        return "FockBasis(M=%d, cap=%d, dim=%d)" % (
            self.num_modes, self.cap, self.dim)

    def occupations(self):
        """All states as a (dim, M) integer array."""
        return np.array(self.states, dtype=np.int64)

    def grade_indices(self, grade):
        return np.flatnonzero(self.grades == grade)

    def interior_mask(self, budget):
        """True on states at least ``budget`` grades below the cap."""
        return self.grades <= self.cap - budget

    def vacuum(self):
        v = np.zeros(self.dim, dtype=complex)
        v[0] = 1.0
        return v


def enumerate_basis(num_modes, cap, max_dim=500_000):
    return FockBasis(num_modes, cap, max_dim=max_dim)


class FockOperator:
    """A sparse matrix on a FockBasis plus structural bookkeeping.

    grading : int or None
        If set, every nonzero entry connects grade n to grade n + grading.
    herm : bool
        Declared Hermitian (checked by tests, not enforced here).
    """

    def __init__(self, basis, mat, grading=None, herm=False):
        mat = sparse.csr_matrix(mat)
        if mat.shape != (basis.dim, basis.dim):
            raise ValueError("matrix shape %s does not fit basis dim %d"
                             % (mat.shape, basis.dim))
        mat.sum_duplicates()
        self.basis = basis
        self.mat = mat
        self.grading = grading
        self.herm = herm

    def apply(self, vec):
        return self.mat @ vec

    def dagger(self):
        g = None if self.grading is None else -self.grading
        return FockOperator(self.basis, self.mat.conj().T.tocsr(),
                            grading=g, herm=self.herm)

    def grading_violation(self):
        """Largest entry magnitude outside the declared grade offset."""
        if self.grading is None:
            return 0.0
        coo = self.mat.tocoo()
        off = self.basis.grades[coo.row] - self.basis.grades[coo.col]
        bad = off != self.grading
        return float(np.abs(coo.data[bad]).max()) if bad.any() else 0.0

    def __repr__(self):
        return "FockOperator(dim=%d, nnz=%d, grading=%r, herm=%r)" % (
            self.basis.dim, self.mat.nnz, self.grading, self.herm)


def _check_coeff(f, basis):
    f = np.asarray(f, dtype=complex)
    if f.shape != (basis.num_modes,):
        raise ValueError("coefficient vector has shape %s, expected (%d,)"
                         % (f.shape, basis.num_modes))
    return f


def annihilator(f, basis):
    """a(f) = sum_i conj(f_i) a_i, lowering total boson number by one."""
    f = _check_coeff(f, basis)
    rows, cols, data = [], [], []
    for col, occ in enumerate(basis.states):
        for i in range(basis.num_modes):
            n = occ[i]
            if n == 0 or f[i] == 0:
                continue
            lowered = occ[:i] + (n - 1,) + occ[i + 1:]
            rows.append(basis.index[lowered])
            cols.append(col)
            data.append(np.conj(f[i]) * math.sqrt(n))
    mat = sparse.coo_matrix((data, (rows, cols)),
                            shape=(basis.dim, basis.dim), dtype=complex)
    return FockOperator(basis, mat, grading=-1)


def creator(f, basis):
    """Adjoint of annihilator(f); amplitudes above the cap are dropped."""
    return annihilator(f, basis).dagger()


def second_quantization(t, basis):
    """Lift a one-particle operator to the truncated Fock space.

    ``t`` may be a length-M vector (diagonal one-particle operator, e.g. a
    dispersion) or an (M, M) matrix.  The lift preserves total boson number.
    """
    t = np.asarray(t)
    M = basis.num_modes
    if t.shape == (M,):
        occ = basis.occupations()
        diag = occ @ t.astype(complex)
        herm = bool(np.all(np.isreal(t)))
        return FockOperator(basis, sparse.diags(diag, format="csr"),
                            grading=0, herm=herm)
    if t.shape != (M, M):
        raise ValueError("one-particle operator must be (M,) or (M, M)")
    t = t.astype(complex)
    rows, cols, data = [], [], []
    nz = [(i, j) for i in range(M) for j in range(M)
          if i != j and t[i, j] != 0]
    for col, s in enumerate(basis.states):
        d = sum(t[i, i] * s[i] for i in range(M) if s[i])
        if d != 0:
            rows.append(col)
            cols.append(col)
            data.append(d)
        for i, j in nz:
            nj = s[j]
            if nj == 0:
                continue
            moved = list(s)
            moved[j] -= 1
            moved[i] += 1
            rows.append(basis.index[tuple(moved)])
            cols.append(col)
            data.append(t[i, j] * math.sqrt(nj * (s[i] + 1)))
    mat = sparse.coo_matrix((data, (rows, cols)),
                            shape=(basis.dim, basis.dim), dtype=complex)
    herm = bool(np.allclose(t, t.conj().T, rtol=0, atol=0))
    return FockOperator(basis, mat, grading=0, herm=herm)


def number_operator(basis):
    return second_quantization(np.ones(basis.num_modes), basis)


def exp_tail(x, cap):
    """Remainder sum_{n > cap} x^n / n! of the exponential series, x >= 0.

    Evaluated in log space so large x and large cap do not overflow; this is
    the universal truncation-error currency for coherent-type vectors
    (x plays the role of a squared norm).
    """
    if x < 0:
        raise ValueError("x must be nonnegative")
    if x == 0:
        return 0.0
    n = cap + 1
    # the series peaks near n = x; if the peak term already overflows a
    # double, so does the tail
    peak = max(n, x)
    if peak * math.log(x) - math.lgamma(peak + 1) > 700:
        return math.inf
    term = math.exp(n * math.log(x) - math.lgamma(n + 1))
    total = 0.0
    while term > 0:
        total += term
        n += 1
        term *= x / n
        if n > x and term < total * 1e-18:
            break
    return total


def exponential_vector(f, basis):
    """Truncated exponential vector of f and its normalization tail.

    The coefficient on occupation (n_1, ..., n_M) is
    prod_i f_i^{n_i} / sqrt(n_i!).  The squared norm of the untruncated
    vector is exp(|f|^2); the returned tail is the part of that series
    beyond the cap, exp_tail(|f|^2, cap).
    """
    f = _check_coeff(f, basis)
    vec = np.empty(basis.dim, dtype=complex)
    for idx, occ in enumerate(basis.states):
        c = 1.0 + 0.0j
        for i in range(basis.num_modes):
            n = occ[i]
            if n:
                c *= f[i] ** n / math.sqrt(math.factorial(n))
        vec[idx] = c
    x = float(np.vdot(f, f).real)
    return vec, exp_tail(x, basis.cap)


def coherent_state(g, basis, tail_tol=1e-8):
    """Unit-normalized truncated coherent vector for configuration g.

    Warns when the discarded probability mass (the normalized exponential
    tail) exceeds tail_tol, i.e. when the cap is too small for this g.
    """
    vec, tail = exponential_vector(g, basis)
    x = float(np.vdot(g, g).real)
    lost = tail * math.exp(-x)
    if lost > tail_tol:
        warnings.warn(
            "coherent state loses %.3g probability mass at cap %d; "
            "increase the cap" % (lost, basis.cap), stacklevel=2)
    nrm = np.linalg.norm(vec)
    return vec / nrm


def exp_nilpotent(mat, cap):
    """exp of a matrix whose (cap+1)-th power vanishes on this basis.

    Plain truncated series sum_{k<=cap} mat^k / k!; exact for graded raising
    or lowering generators, where nilpotency is structural.
    """
    n = mat.shape[0]
    acc = sparse.identity(n, dtype=complex, format="csr")
    term = acc
    for k in range(1, cap + 1):
        term = (term @ mat) / k
        if term.nnz == 0:
            break
        acc = acc + term
    return acc.tocsr()


def displacement(g, basis, tail_tol=1e-8):
    """Truncated Weyl displacement for configuration g.

    Built from the normally ordered factorization
    exp(-|g|^2/2) exp(a~(g)) exp(-a(g)), whose two series terminate exactly
    at the cap.  Returns (operator, unitarity_defect).

    The reported defect is the squared-norm deficit |1 - |W vacuum|^2| of
    the displaced vacuum, which equals the Poisson mass the coherent image
    loses to truncation.  Columns at the cap boundary are always order-one
    non-unitary on a truncated space, whatever the tail, so a global
    max-entry measure of W*W - 1 would say nothing about the regime the
    operator is actually used in; the vacuum-column deficit does, and it is
    the quantity the tail bound controls.  Exceeding ``tail_tol`` warns.
    """
    g = _check_coeff(g, basis)
    x = float(np.vdot(g, g).real)
    up = exp_nilpotent(creator(g, basis).mat, basis.cap)
    down = exp_nilpotent(annihilator(-g, basis).mat, basis.cap)
    w = (math.exp(-0.5 * x) * (up @ down)).tocsr()
    col = w @ basis.vacuum()
    defect = abs(float(np.vdot(col, col).real) - 1.0)
    if defect > tail_tol:
        warnings.warn("displacement loses %.3g vacuum-column mass at cap "
                      "%d; increase the cap for |g|^2 = %.3g"
                      % (defect, basis.cap, x), stacklevel=2)
    return FockOperator(basis, w), defect


def embedding(sub, sup):
    """Isometry from a smaller basis into a larger one, same mode count.

    Maps each occupation tuple of ``sub`` to the identical tuple of ``sup``;
    requires sub.cap <= sup.cap.  Returned as a (sup.dim, sub.dim) sparse
    0/1 matrix with orthonormal columns.
    """
    if sub.num_modes != sup.num_modes:
        raise ValueError("mode counts differ")
    if sub.cap > sup.cap:
        raise ValueError("sub basis must not exceed the super basis cap")
    rows = np.fromiter((sup.index[s] for s in sub.states), dtype=np.int64,
                       count=sub.dim)
    cols = np.arange(sub.dim)
    data = np.ones(sub.dim)
    return sparse.coo_matrix((data, (rows, cols)),
                             shape=(sup.dim, sub.dim), dtype=complex).tocsr()
