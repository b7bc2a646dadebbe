"""One-particle momentum grids, form factors, and the self-energy counterterm.

The continuum one-particle space is replaced by a finite quadrature rule
{(k_i, w_i)}.  Every coefficient vector handed to the Fock-space layer absorbs
sqrt(w_i), so the plain euclidean pairing sum(conj(u_i) v_i) reproduces the
grid quadrature of the continuum inner product and no weights need to be
threaded through the operator algebra.  Inner products are antilinear in the
first slot throughout the package.

Two geometries are supported:

* d = 1, signed momenta.  Used by the translation-invariant fiber models,
  where the momentum second-quantization needs actual vector (here scalar,
  signed) mode momenta.
* d = 3 with isotropic reduction.  Nodes are radial magnitudes and the
  weights carry the 4 pi k^2 shell factor, so radially symmetric data lose
  nothing.

Dispersion is relativistic, omega(k) = sqrt(k^2 + mu^2) with field mass
mu >= 0.
"""

import math

import numpy as np
from scipy.integrate import quad

_KINDS = ("nelson_sharp", "weisskopf_wigner", "custom_table")


class ModeSet:
    """A discretized one-particle momentum space.

    Parameters
    ----------
    dimension : int
        1 or 3.
    nodes : array_like
        Momentum nodes.  Shape (n,) for signed 1d momenta or isotropic 3d
        radial magnitudes; shape (n, 3) for explicit 3d product grids.
    weights : array_like
        Positive quadrature weights, already including the 4 pi k^2 shell
        factor in the isotropic 3d case.
    mass : float
        Field mass mu >= 0.
    grid_kind : str
        One of "linear", "logarithmic", "custom".  Informational.
    """

    def __init__(self, dimension, nodes, weights, mass=0.0, grid_kind="custom"):
        if dimension not in (1, 3):
            raise ValueError("dimension must be 1 or 3, got %r" % (dimension,))
        nodes = np.asarray(nodes, dtype=float)
        weights = np.asarray(weights, dtype=float)
        if nodes.ndim not in (1, 2):
            raise ValueError("nodes must be a 1d or 2d array")
        if nodes.ndim == 2 and nodes.shape[1] != dimension:
            raise ValueError("node vectors must have length %d" % dimension)
        if len(nodes) != len(weights):
            raise ValueError("nodes and weights must have equal length")
        if len(nodes) == 0:
            raise ValueError("empty mode set")
        if np.any(weights <= 0):
            raise ValueError("all quadrature weights must be positive")
        if mass < 0:
            raise ValueError("mass must be nonnegative")
        key = nodes if nodes.ndim == 2 else nodes[:, None]
        if len(np.unique(key.round(decimals=14), axis=0)) != len(nodes):
            raise ValueError("nodes must be pairwise distinct")
        self.dimension = int(dimension)
        self.nodes = nodes
        self.weights = weights
        self.mass = float(mass)
        self.grid_kind = grid_kind

    def __len__(self):
        return len(self.nodes)

    def __repr__(self):
        return "ModeSet(d=%d, n=%d, mu=%g, %s)" % (
            self.dimension, len(self), self.mass, self.grid_kind)

    @property
    def kmag(self):
        """Euclidean magnitude |k_i| of every node."""
        if self.nodes.ndim == 2:
            return np.linalg.norm(self.nodes, axis=1)
        return np.abs(self.nodes)

    @property
    def omega(self):
        """Dispersion omega_i = sqrt(|k_i|^2 + mu^2)."""
        return np.hypot(self.kmag, self.mass)

    def momentum_component(self, c):
        """The c-th cartesian momentum component of every node.

        Isotropic radial 3d grids carry no direction information, so asking
        for a component there is an error.
        """
        if self.nodes.ndim == 2:
            return self.nodes[:, c]
        if self.dimension == 1:
            if c != 0:
                raise ValueError("1d grid has only component 0")
            return self.nodes
        raise ValueError(
            "isotropic radial grid has no momentum components; "
            "use a d=1 signed grid or an explicit 3d product grid")


def _cell_weights(edges_lo, edges_hi):
    w = edges_hi - edges_lo
    if np.any(w <= 0):
        raise ValueError("degenerate grid cell")
    return w


def log_grid(dimension, k_min, k_max, count, mass=0.0, signed=None):
    """Logarithmically spaced grid on [k_min, k_max].

    Weights come from the cells between geometric midpoints of neighbouring
    nodes (end cells close at k_min, k_max), times the 4 pi k^2 shell factor
    when dimension == 3.  For dimension == 1 the grid is mirrored to negative
    momenta by default (``signed=True``), in which case ``count`` is the total
    node count and must be even.

    A sensible resolution is 6 to 10 nodes per decade and side.
    """
    if not (0 < k_min < k_max):
        raise ValueError("need 0 < k_min < k_max")
    if signed is None:
        signed = dimension == 1
    if signed and dimension != 1:
        raise ValueError("signed grids are 1d only")
    n = int(count)
    if signed:
        if n % 2:
            raise ValueError("signed grid needs an even total node count")
        n //= 2
    if n < 1:
        raise ValueError("count too small")
    mags = np.geomspace(k_min, k_max, n)
    if n == 1:
        edges = np.array([k_min, k_max])
    else:
        inner = np.sqrt(mags[:-1] * mags[1:])
        edges = np.concatenate(([k_min], inner, [k_max]))
    w = _cell_weights(edges[:-1], edges[1:])
    if dimension == 3:
        w = 4.0 * math.pi * mags ** 2 * w
    if signed:
        nodes = np.concatenate((-mags[::-1], mags))
        w = np.concatenate((w[::-1], w))
    else:
        nodes = mags
    return ModeSet(dimension, nodes, w, mass=mass, grid_kind="logarithmic")


def linear_grid(dimension, k_min, k_max, count, mass=0.0, signed=None):
    """Uniform midpoint-rule companion of log_grid.

    Nodes sit at the centers of ``count`` equal cells covering
    [k_min, k_max], so k_min = 0 never produces a node at the origin.
    """
    if not (0 <= k_min < k_max):
        raise ValueError("need 0 <= k_min < k_max")
    if signed is None:
        signed = dimension == 1
    if signed and dimension != 1:
        raise ValueError("signed grids are 1d only")
    n = int(count)
    if signed:
        if n % 2:
            raise ValueError("signed grid needs an even total node count")
        n //= 2
    if n < 1:
        raise ValueError("count too small")
    edges = np.linspace(k_min, k_max, n + 1)
    mags = 0.5 * (edges[:-1] + edges[1:])
    w = _cell_weights(edges[:-1], edges[1:])
    if dimension == 3:
        w = 4.0 * math.pi * mags ** 2 * w
    if signed:
        nodes = np.concatenate((-mags[::-1], mags))
        w = np.concatenate((w[::-1], w))
    else:
        nodes = mags
    return ModeSet(dimension, nodes, w, mass=mass, grid_kind="linear")


class FormFactorSpec:
    """Shape of the linear coupling, before grid sampling.

    kind is one of "nelson_sharp" (1/sqrt(2 omega) inside the cutoff window),
    "weisskopf_wigner" (1/sqrt(omega)), or "custom_table" (explicit per-node
    values via ``table``).  The window [sigma0, sigma] applies to every kind;
    the defaults sigma=inf, sigma0=0 leave the factor unwindowed.
    """

    def __init__(self, kind, sigma=math.inf, sigma0=0.0, coupling=1.0, table=None):
        if kind not in _KINDS:
            raise ValueError("unknown form factor kind %r (use one of %s)"
                             % (kind, ", ".join(_KINDS)))
        sigma = float(sigma)
        sigma0 = float(sigma0)
        if not 0.0 <= sigma0 < sigma:
            raise ValueError("cutoffs must satisfy 0 <= sigma0 < sigma, got "
                             "sigma0=%g sigma=%g" % (sigma0, sigma))
        if not math.isfinite(coupling):
            raise ValueError("coupling must be finite")
        if kind == "custom_table" and table is None:
            raise ValueError("custom_table needs a table of per-node values")
        self.kind = kind
        self.sigma = sigma
        self.sigma0 = sigma0
        self.coupling = float(coupling)
        self.table = None if table is None else np.asarray(table, dtype=complex)

    def replace(self, **kw):
        """Copy with some fields changed (used by cutoff sweeps)."""
        args = dict(kind=self.kind, sigma=self.sigma, sigma0=self.sigma0,
                    coupling=self.coupling, table=self.table)
        args.update(kw)
        return FormFactorSpec(**args)

    def __repr__(self):
        return "FormFactorSpec(%s, sigma=%g, sigma0=%g, coupling=%g)" % (
            self.kind, self.sigma, self.sigma0, self.coupling)


def sample_form_factor(spec, modes):
    """Evaluate a form factor on a grid, weights absorbed.

    Returns the coefficient vector c_i = coupling * sqrt(w_i) * v(k_i), with
    nodes outside the window [sigma0, sigma] set to zero.
    """
    kmag = modes.kmag
    omega = modes.omega
    window = (kmag >= spec.sigma0) & (kmag <= spec.sigma)
    if spec.kind == "custom_table":
        if spec.table.shape != (len(modes),):
            raise ValueError("custom table has %d entries for %d nodes"
                             % (len(spec.table), len(modes)))
        vals = spec.table.copy()
    else:
        vals = np.zeros(len(modes), dtype=complex)
        live = window & (omega > 0)
        if np.any(window & (omega == 0)):
            raise ValueError("form factor diverges on a node with omega = 0; "
                             "use sigma0 > 0 or mu > 0")
        if spec.kind == "nelson_sharp":
            vals[live] = 1.0 / np.sqrt(2.0 * omega[live])
        else:  # weisskopf_wigner
            vals[live] = 1.0 / np.sqrt(omega[live])
    out = spec.coupling * np.sqrt(modes.weights) * vals
    out[~window] = 0.0
    return out


def vhm_ground_config(v, modes):
    """Dressing configuration -v/omega of the scalar-source model."""
    v = np.asarray(v, dtype=complex)
    omega = modes.omega
    bad = (omega == 0) & (v != 0)
    if np.any(bad):
        raise ValueError("-v/omega singular: node(s) %s have omega = 0 with "
                         "nonzero coupling; refine with sigma0 > 0"
                         % np.flatnonzero(bad))
    g = np.zeros_like(v)
    ok = omega > 0
    g[ok] = -v[ok] / omega[ok]
    return g


def gross_config(v, modes):
    """Dressing configuration -v/(omega + k^2) used by the fiber models."""
    v = np.asarray(v, dtype=complex)
    denom = modes.omega + modes.kmag ** 2
    if np.any(denom == 0):
        raise ValueError("node at k = 0 with massless dispersion; the "
                         "dressing denominator omega + k^2 vanishes there")
    return -v / denom


def self_energy(spec, modes=None, *, dimension=None, mass=None):
    """Self-energy counterterm for the sharp-cutoff coupling.

    Computes  -coupling^2 * integral over sigma0 <= |k| <= sigma of
    1 / (2 omega (omega + k^2))  with the d=3 radial measure 4 pi k^2 dk or
    the two-sided d=1 measure.  The quadrature is adaptive and independent of
    any mode grid, so the counterterm can be used to test grid convergence.

    For mu = 0 in d = 3 the closed form is -2 pi log((1+sigma)/(1+sigma0)).
    """
    if modes is not None:
        dimension = modes.dimension
        mass = modes.mass
    if dimension is None or mass is None:
        raise ValueError("need either a ModeSet or explicit dimension and mass")
    if not math.isfinite(spec.sigma):
        raise ValueError("self-energy diverges as sigma -> inf; "
                         "sweep finite sigma values instead")
    lo, hi = spec.sigma0, spec.sigma
    if hi <= lo or spec.coupling == 0:
        return 0.0

    def integrand(k):
        w = math.hypot(k, mass)
        base = 1.0 / (2.0 * w * (w + k * k))
        if dimension == 3:
            return 4.0 * math.pi * k * k * base
        return 2.0 * base  # both momentum signs

    # split at decade boundaries so QUADPACK sees smooth pieces even for
    # windows spanning many orders of magnitude
    cuts = [lo]
    if lo > 0:
        d = math.ceil(math.log10(lo))
        while 10.0 ** d < hi:
            if 10.0 ** d > lo:
                cuts.append(10.0 ** d)
            d += 1
    cuts.append(hi)
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        val, _ = quad(integrand, a, b, epsabs=1e-10, epsrel=1e-12, limit=200)
        total += val
    return -spec.coupling ** 2 * total
