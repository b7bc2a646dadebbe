"""Resolvent-convergence diagnostics for operators on different spaces.

Members of a family live on their own (possibly renormalized, possibly
smaller) spaces; an isometry per member embeds them into one parent space,
and convergence is measured between the embedded resolvents

    iota (T + z)^{-1} iota*

at a nonreal shift z.  This is the finite-dimensional realization of
resolvent convergence for operators that do not share a Hilbert space:
whiten each member against its own metric first, then embed.
"""

import numpy as np
from scipy import sparse
import scipy.linalg


class EmbeddedOperatorFamily:
    """Operators T_a with isometries iota_a into a common parent space.

    The last member added (or the one named by ``limit_index``) plays the
    role of the limit.  Members must be Hermitian in the frame they are
    handed in; whitening against a renormalized metric is the caller's job.
    """

    def __init__(self, parent_dim, limit_index=-1):
        self.parent_dim = int(parent_dim)
        self.limit_index = limit_index
        self.members = []

    def add(self, operator, iota=None, herm_tol=1e-10, iso_tol=1e-12):
        """Add a member; iota=None means the member lives on the parent."""
        if sparse.issparse(operator):
            operator = operator.toarray()
        operator = np.asarray(operator, dtype=complex)
        n = operator.shape[0]
        if operator.shape != (n, n):
            raise ValueError("operator must be square")
        scale = max(1.0, float(np.abs(operator).max()))
        if np.abs(operator - operator.conj().T).max() > herm_tol * scale:
            raise ValueError("member %d is not Hermitian in its own frame; "
                             "whiten it first" % len(self.members))
        if iota is None:
            if n != self.parent_dim:
                raise ValueError("member without embedding must live on the "
                                 "parent space")
            iota = np.eye(self.parent_dim)
        else:
            if sparse.issparse(iota):
                iota = iota.toarray()
            iota = np.asarray(iota, dtype=complex)
            if iota.shape != (self.parent_dim, n):
                raise ValueError("embedding shape %s does not map dim %d "
                                 "into parent dim %d"
                                 % (iota.shape, n, self.parent_dim))
            gram = iota.conj().T @ iota
            if np.abs(gram - np.eye(n)).max() > iso_tol:
                raise ValueError("embedding of member %d is not an isometry"
                                 % len(self.members))
        self.members.append((operator, iota))
        return self

    def __len__(self):
        return len(self.members)


def _embedded_resolvent(operator, iota, z):
    n = operator.shape[0]
    if z.imag == 0.0:
        evals = scipy.linalg.eigvalsh(operator)
        if np.min(np.abs(evals + z)) <= 1e-12 * max(1.0, np.abs(evals).max()):
            raise ValueError("real shift %g sits on the spectrum" % z.real)
    R = np.linalg.solve(operator + z * np.eye(n), iota.conj().T)
    return iota @ R


def resolvent_distance(family, z=1j, mode="norm", probes=None):
    """Distance of each member's embedded resolvent to the limit member's.

    mode "norm": spectral norm of the difference.  mode "strong": largest
    difference over the supplied probe vectors (columns of ``probes`` in
    the parent space), normalized per probe.  Returns one real per member;
    the limit member's distance is 0 by construction.
    """
    if not len(family):
        return []
    z = complex(z)
    resolvents = [_embedded_resolvent(op, io, z) for op, io in family.members]
    ref = resolvents[family.limit_index]
    if mode == "norm":
        return [float(np.linalg.norm(R - ref, 2)) for R in resolvents]
    if mode == "strong":
        if probes is None:
            raise ValueError("strong mode needs probe vectors")
        probes = np.asarray(probes, dtype=complex)
        if probes.ndim == 1:
            probes = probes[:, None]
        if probes.shape[0] != family.parent_dim:
            raise ValueError("probes must live on the parent space")
        nrm = np.linalg.norm(probes, axis=0)
        if np.any(nrm == 0):
            raise ValueError("zero probe vector")
        out = []
        for R in resolvents:
            diff = (R - ref) @ probes
            out.append(float(np.max(np.linalg.norm(diff, axis=0) / nrm)))
        return out
    raise ValueError("mode must be 'norm' or 'strong'")


def rate_fit(distances, parameters):
    """Power-law fit exponent of distances against parameters.

    Least squares of log(distance) on log(parameter) after discarding
    nonpositive entries; returns (exponent, prefactor, rms residual).
    Fewer than 3 usable points is an error.  The fit is purely descriptive.
    """
    d = np.asarray(distances, dtype=float)
    p = np.asarray(parameters, dtype=float)
    if d.shape != p.shape:
        raise ValueError("distances and parameters must align")
    keep = (d > 0) & (p > 0) & np.isfinite(d) & np.isfinite(p)
    if keep.sum() < 3:
        raise ValueError("need at least 3 positive finite points, have %d"
                         % int(keep.sum()))
    ld, lp = np.log(d[keep]), np.log(p[keep])
    coef, res = np.polynomial.polynomial.polyfit(lp, ld, 1, full=True)
    intercept, slope = coef
    ss = float(res[0][0]) if len(res[0]) else 0.0
    rms = float(np.sqrt(ss / keep.sum()))
    return float(slope), float(np.exp(intercept)), rms
