"""Shared numerical helpers: deterministic eigensolves, phase fixing.

All solvers here are seeded and single-path so repeated runs of the same
problem give bitwise-identical output, which the delimited-output contract
of the command line tool relies on.
"""

import numpy as np
from scipy import sparse
import scipy.linalg
import scipy.sparse.linalg as spla


def canonical_phase(vec):
    """Rotate a vector so its largest-magnitude entry is real positive.

    Ties in magnitude are broken by the lowest index (argmax).  Zero vectors
    are returned unchanged.
    """
    vec = np.asarray(vec)
    j = int(np.argmax(np.abs(vec)))
    a = vec[j]
    if a == 0:
        return vec
    return vec * (np.conj(a) / abs(a))


def _gershgorin_floor(mat):
    mat = sparse.csr_matrix(mat)
    d = mat.diagonal()
    radii = np.asarray(np.abs(mat).sum(axis=1)).ravel() - np.abs(d)
    return float(np.min(d.real - radii))


def lowest_eigenpairs(H, k=1, tol=1e-10, seed=0, maxiter=5000,
                      dense_cutoff=1200):
    """Lowest k eigenpairs of a Hermitian operator, deterministically.

    Dense path (scipy.linalg.eigh) below ``dense_cutoff``; otherwise
    shift-invert Lanczos with the shift placed strictly below the spectrum
    via a Gershgorin bound and a seeded start vector.  Eigenvectors come
    back phase-canonicalized as columns, ordered by ascending eigenvalue.

    Residuals |H x - lambda x| are checked against tol * (|lambda| + 1);
    a violation raises instead of returning silently bad pairs.
    """
    n = H.shape[0]
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= dim")
    if sparse.issparse(H):
        Hs = H.tocsr()
    else:
        Hs = sparse.csr_matrix(H)
    hdef = abs(Hs - Hs.conj().T)
    hmax = hdef.max() if hdef.nnz else 0.0
    scale = abs(Hs).max() if Hs.nnz else 0.0
    if hmax > 1e-10 * max(1.0, scale):
        raise ValueError("operator is not Hermitian (defect %.3g)" % hmax)

    if n <= dense_cutoff or k > n - 2:
        dense = Hs.toarray()
        dense = 0.5 * (dense + dense.conj().T)
        vals, vecs = scipy.linalg.eigh(dense)
        vals, vecs = vals[:k], vecs[:, :k]
    else:
        # exact inverse iterations about a point below the whole spectrum
        # pick out the lowest eigenvalues as the ones nearest the shift
        shift = _gershgorin_floor(Hs) - 1.0
        rng = np.random.default_rng(seed)
        v0 = rng.standard_normal(n)
        v0 /= np.linalg.norm(v0)
        vals, vecs = spla.eigsh(Hs, k=k, sigma=shift, which="LM", v0=v0,
                                maxiter=maxiter)
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]

    vecs = np.ascontiguousarray(vecs, dtype=complex)
    resid = np.empty(k)
    for j in range(k):
        vecs[:, j] = canonical_phase(vecs[:, j])
        resid[j] = np.linalg.norm(Hs @ vecs[:, j] - vals[j] * vecs[:, j])
        if resid[j] > tol * (abs(vals[j]) + 1.0):
            raise RuntimeError(
                "eigenpair %d residual %.3g exceeds tol %.3g * (|lambda|+1); "
                "loosen tol or raise maxiter" % (j, resid[j], tol))
    return vals, vecs, resid


def hermitian_defect(mat):
    """max |A - A*| entrywise, for sparse or dense A."""
    if sparse.issparse(mat):
        d = abs(mat - mat.conj().T)
        return float(d.max()) if d.nnz else 0.0
    return float(np.abs(mat - np.conj(mat.T)).max())
