"""Acceptance battery for the whole package, behind ``renormfock suite``.

Fourteen quantitative checks, one per headline property: closed-form
ground energies, exact algebraic identities of the dressing calculus,
kernel damping in the renormalized spin sector, resolvent flatness and
refinement trends of dressed families, and the cutoff-sweep diagnostics.
Each check function returns (ok, detail); ``run_suite`` prints one verdict
line per check and returns a shell exit code.  Everything is seeded, so
the battery is deterministic run to run.
"""

import math
import time

import numpy as np
import scipy.linalg
from scipy import sparse

from . import convergence, doi, dressing, fock, modes, nelson, vhm
from . import spinboson as sb
from .linalg import lowest_eigenpairs

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def _rand_complex(rng, n, scale=1.0):
    return scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


def _interior_fock(rng, basis, budget):
    v = np.zeros(basis.dim, dtype=complex)
    m = basis.grades <= budget
    v[m] = _rand_complex(rng, int(m.sum()))
    return v / np.linalg.norm(v)


def _interior_spin(rng, spin_dim, basis, budget):
    grades = np.repeat(basis.grades[None, :], spin_dim, axis=0).ravel()
    idx = np.flatnonzero(grades <= budget)
    v = np.zeros(spin_dim * basis.dim, dtype=complex)
    v[idx] = _rand_complex(rng, len(idx))
    return v / np.linalg.norm(v)


def _random_normal(rng, n):
    q, _ = np.linalg.qr(rng.standard_normal((n, n))
                        + 1j * rng.standard_normal((n, n)))
    eigs = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return q @ np.diag(eigs) @ q.conj().T


def check_source_ground_energy():
    """Single mode omega=2, v=1: lambda0 = -|v|^2/omega = -0.5 within 1e-8."""
    t0 = time.perf_counter()
    ms = modes.ModeSet(1, [2.0], [1.0])
    b = fock.enumerate_basis(1, 20)
    m = vhm.assemble_vhm(np.array([1.0 + 0j]), ms, b)
    vals, _, _ = lowest_eigenpairs(m.H.mat, k=1, tol=1e-12)
    dt = time.perf_counter() - t0
    err = abs(vals[0] + 0.5)
    ok = err <= 1e-8 and dt < 1.0
    return ok, "lambda0 = %.12g, |err| = %.2g in %.2f s" % (vals[0], err, dt)


def check_coherent_ground_state():
    """The same ground vector is the coherent state of g = -v/omega."""
    ms = modes.ModeSet(1, [2.0], [1.0])
    b = fock.enumerate_basis(1, 20)
    v = np.array([1.0 + 0j])
    m = vhm.assemble_vhm(v, ms, b)
    _, vecs, _ = lowest_eigenpairs(m.H.mat, k=1, tol=1e-12)
    c = fock.coherent_state(modes.vhm_ground_config(v, ms), b)
    overlap = abs(np.vdot(vecs[:, 0], c))
    return overlap >= 1.0 - 1e-6, "|<x0, c_g>| = %.10f" % overlap


def check_exponential_eigenrelation():
    """a(f) e(g) = <f, g> e(g), exact on every grade below the cap."""
    rng = np.random.default_rng(3)
    b = fock.enumerate_basis(2, 6)
    g = _rand_complex(rng, 2)
    f = _rand_complex(rng, 2)
    ef, _ = fock.exponential_vector(g, b)
    out = fock.annihilator(f, b).apply(ef)
    z = np.vdot(f, g)
    worst = 0.0
    for grade in range(b.cap):
        idx = b.grade_indices(grade)
        scale = max(1.0, float(np.abs(z * ef[idx]).max()))
        worst = max(worst, float(np.abs(out[idx] - z * ef[idx]).max()) / scale)
    return worst <= 1e-12, "gradewise residual %.2g" % worst


def check_metric_unipotence_group_laws():
    """det G = 1 and the frame-transfer maps compose as a group."""
    rng = np.random.default_rng(4)
    b = fock.enumerate_basis(3, 4)
    g1, g2, g3 = (_rand_complex(rng, 3) for _ in range(3))
    met = dressing.renorm_metric(g1, b, cond_warn=np.inf)
    det_err = abs(np.linalg.det(met.gram) - 1.0)
    eye = np.eye(b.dim)
    inv = dressing.transfer(g2, g1, b).mat @ dressing.transfer(g1, g2, b).mat
    inv_err = float(np.abs(inv - eye).max())
    rhs = dressing.transfer(g1, g3, b).mat
    comp = dressing.transfer(g2, g3, b).mat @ dressing.transfer(g1, g2, b).mat
    scale = max(1.0, float(np.abs(rhs.toarray()).max()))
    comp_err = float(np.abs((comp - rhs).toarray()).max()) / scale
    ok = det_err <= 1e-9 and inv_err <= 1e-12 and comp_err <= 1e-12
    return ok, "det err %.2g, inverse %.2g, composition %.2g" % (
        det_err, inv_err, comp_err)


def check_mollified_inner_products():
    """Renormalized inner products on interior states match the mollified
    route within the computed raising-tail bound (|g|^2 = 1, cap 16)."""
    rng = np.random.default_rng(11)
    b = fock.enumerate_basis(1, 16)
    g = np.array([1.0 + 0j])
    met = dressing.renorm_metric(g, b)
    psi = _interior_fock(rng, b, 2)
    phi = _interior_fock(rng, b, 2)
    direct, _, gap = dressing.mollified_inner_check(psi, phi, g, met)
    bound = dressing.mollified_gap_bound(1.0, b.cap, 2, 2, 1.0, 1.0,
                                         abs(direct))
    ok = gap <= bound and gap <= 1e-10
    return ok, "gap %.2g within bound %.2g" % (gap, bound)


def check_self_energy_closed_form():
    """Massless 3d quadrature vs -2*pi*log((1+sigma)/(1+sigma0))."""
    worst = 0.0
    for sigma, sigma0 in ((3.0, 1.0), (10.0, 0.1)):
        spec = modes.FormFactorSpec("nelson_sharp", sigma=sigma,
                                    sigma0=sigma0, coupling=1.0)
        got = modes.self_energy(spec, dimension=3, mass=0.0)
        want = -2.0 * math.pi * math.log((1.0 + sigma) / (1.0 + sigma0))
        worst = max(worst, abs(got - want) / abs(want))
    return worst <= 1e-6, "worst relative error %.2g" % worst


def check_spectral_calculus():
    """Constant kernel reproduces the operator; the certified lower norm
    estimate stays below the Hilbert-Schmidt bound on 20 random draws."""
    rng = np.random.default_rng(7)
    dec = doi.spectral_decompose(_random_normal(rng, 4))
    A = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    ones = doi.DOIKernel("custom", lambda lam, mu: 1.0)
    rec_err = float(np.abs(doi.doi_apply(A, dec, ones) - A).max())
    worst_excess = -math.inf
    for _ in range(20):
        d1 = doi.spectral_decompose(_random_normal(rng, 4))
        d2 = doi.spectral_decompose(_random_normal(rng, 4))
        T = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        val = doi.decomposability_norm(T, d1, d2, samples=4, iters=40)
        worst_excess = max(worst_excess,
                           val - float(np.linalg.norm(T, "fro")))
    ok = rec_err <= 1e-12 and worst_excess <= 1e-9
    return ok, "recovery %.2g, worst bound excess %.2g" % (rec_err,
                                                           worst_excess)


def check_vacuum_damping():
    """Anticommuting spin part: vacuum blocks damp by e^{-2|g|^2}; the
    singular kernel removes them entirely and leaves a twofold bottom."""
    spin = sb.SpinSpace(SZ, SX)
    b = fock.enumerate_basis(2, 8)
    worst = 0.0
    for x in (0.5, 1.0, 2.0):
        rng = np.random.default_rng(int(10 * x))
        g = _rand_complex(rng, 2)
        g *= math.sqrt(x) / np.linalg.norm(g)
        F = sb.renorm_spin_form(spin, g, b)
        blk = np.array([[F[i * b.dim, j * b.dim] for j in range(2)]
                        for i in range(2)])
        worst = max(worst, float(np.abs(blk - math.exp(-2 * x) * SZ).max()))
    rng = np.random.default_rng(5)
    b6 = fock.enumerate_basis(2, 6)
    g6 = _rand_complex(rng, 2, 0.5)
    sing = float(np.abs(sb.renorm_spin_form(spin, g6, b6,
                                            singular=True)).max())
    ms = modes.ModeSet(1, [1.0], [1.0])
    b14 = fock.enumerate_basis(1, 14)
    Hr, _, _ = sb.renormalized_sb(spin, np.array([0.6 + 0j]), ms, b14,
                                  singular=True)
    er = np.sort(scipy.linalg.eig(Hr)[0].real)
    split = abs(er[0] - er[1])
    ok = worst <= 1e-10 and sing == 0.0 and split <= 1e-9
    return ok, "block err %.2g, singular max %g, bottom split %.2g" % (
        worst, sing, split)


def check_energy_preserving_sums():
    """Commuting spin coupling: the renormalized spectrum is the sum set
    of the spin and free-field spectra."""
    rng = np.random.default_rng(5)
    ms = modes.ModeSet(1, [1.0, 2.0], [1, 1])
    b = fock.enumerate_basis(2, 5)
    A = _rand_complex(rng, (2, 2))
    A = (A + A.conj().T) / 2
    spin = sb.SpinSpace(A, A)
    v = _rand_complex(rng, 2, 0.5)
    Hr, Hh, _ = sb.renormalized_sb(spin, v, ms, b)
    free = fock.second_quantization(ms.omega, b).mat.diagonal().real
    want = np.sort(np.add.outer(np.linalg.eigvalsh(A), free).ravel())
    err_h = float(np.abs(np.sort(scipy.linalg.eigvalsh(Hh)) - want).max())
    err_r = float(np.abs(np.sort(scipy.linalg.eig(Hr)[0].real) - want).max())
    ok = max(err_h, err_r) <= 1e-9
    return ok, "spectrum errors %.2g (dressed frame %.2g)" % (err_h, err_r)


def check_commutation_identities():
    """Raising-exponential commutation identities as matrix elements
    between interior-grade states."""
    rng = np.random.default_rng(17)
    spin = sb.SpinSpace(SZ, SX)
    ms = modes.ModeSet(1, [1.0, 2.0], [1, 1])
    b = fock.enumerate_basis(2, 6)
    g = _rand_complex(rng, 2, 0.05)
    v = _rand_complex(rng, 2, 0.1)
    x = float(np.vdot(g, g).real)
    E_up = sb.sb_raise_exp(spin, g, b)
    E_dn = sb.sb_dress_lower(spin, g, b)
    eye_f = sparse.identity(b.dim)
    free = sparse.kron(np.eye(2), fock.second_quantization(ms.omega, b).mat)
    btb = spin.B.conj().T @ spin.B
    inter = (sparse.kron(spin.B, fock.creator(v, b).mat)
             + sparse.kron(spin.B.conj().T, fock.annihilator(v, b).mat))
    ids = [
        free @ E_up - E_up @ (free + sparse.kron(
            spin.B, fock.creator(ms.omega * g, b).mat)),
        inter @ E_up - E_up @ (inter + complex(np.vdot(v, g))
                               * sparse.kron(btb, eye_f)),
        E_dn @ E_up - sparse.kron(scipy.linalg.expm(x * btb), eye_f)
        @ (E_up @ E_dn),
    ]
    worst = 0.0
    for _ in range(6):
        lo = _interior_spin(rng, 2, b, 2)
        hi = _interior_spin(rng, 2, b, 2)
        for L in ids:
            worst = max(worst, abs(np.vdot(hi, L @ lo)))
    return worst <= 1e-10, "worst interior element %.2g" % worst


def check_soft_boson_divergence():
    """Coherent sequence with growing |g|^2: boson number tracks |g|^2
    while the vacuum overlap dies like e^{-|g|^2/2}."""
    b = fock.enumerate_basis(1, 40)
    N = fock.number_operator(b).mat
    vac = b.vacuum()
    nums, overlaps = [], []
    worst_n = worst_o = 0.0
    for x in (1.0, 2.0, 4.0, 8.0):
        c = fock.coherent_state(np.array([math.sqrt(x) + 0j]), b)
        n = float(np.vdot(c, N @ c).real)
        o = abs(np.vdot(c, vac))
        worst_n = max(worst_n, abs(n - x))
        worst_o = max(worst_o, abs(o - math.exp(-x / 2.0)))
        nums.append(n)
        overlaps.append(o)
    monotone = (all(a < b_ for a, b_ in zip(nums, nums[1:]))
                and all(a > b_ for a, b_ in zip(overlaps, overlaps[1:])))
    ok = worst_n <= 1e-6 and worst_o <= 1e-8 and monotone
    return ok, "number err %.2g, overlap err %.2g, trends %s" % (
        worst_n, worst_o, "monotone" if monotone else "BROKEN")


def check_dressed_family_resolvents():
    """Whitened dressed source-model members collapse onto the free field
    (flat family); dressed spin-boson members approach the finest window
    monotonically.  Both checked at shifts i and 2i."""
    grid = modes.log_grid(1, 0.3, 5.0, 8)
    b = fock.enumerate_basis(8, 4)
    fam = convergence.EmbeddedOperatorFamily(b.dim)
    for sigma in (0.5, 1.0, 2.5, 6.0):
        spec = modes.FormFactorSpec("nelson_sharp", sigma=sigma, sigma0=0.2,
                                    coupling=0.4)
        v = modes.sample_form_factor(spec, grid)
        g = modes.vhm_ground_config(v, grid)
        met = dressing.renorm_metric(g, b, cond_warn=np.inf)
        X = met.whiten(vhm.renormalized_vhm(g, grid, b).mat)
        fam.add(0.5 * (X + X.conj().T))
    flat = max(max(convergence.resolvent_distance(fam, z=z))
               for z in (1j, 2j))

    grid3 = modes.log_grid(3, 0.05, 4.0, 12)
    b3 = fock.enumerate_basis(12, 3)
    spin = sb.SpinSpace(SZ, SX)
    fam_sb = convergence.EmbeddedOperatorFamily(2 * b3.dim)
    for s0 in (0.4, 0.3, 0.2, 0.1):
        ww = modes.FormFactorSpec("weisskopf_wigner", sigma=2.0, sigma0=s0,
                                  coupling=0.35)
        v = modes.sample_form_factor(ww, grid3)
        _, h_hat, _ = sb.renormalized_sb(spin, v, grid3, b3)
        fam_sb.add(h_hat)
    strict = True
    dist_i = None
    for z in (1j, 2j):
        d = convergence.resolvent_distance(fam_sb, z=z)
        strict = strict and all(a > b_ for a, b_ in zip(d, d[1:]))
        if z == 1j:
            dist_i = d
    ok = flat <= 1e-8 and strict
    return ok, "flat family spread %.2g; refinement %s" % (
        flat, " > ".join("%.3g" % x for x in dist_i))


def check_fiber_cutoff_sweeps():
    """Ultraviolet doubling stabilizes only after the self-energy
    subtraction; opening the infrared end grows the soft-boson number."""
    t0 = time.perf_counter()
    nodes, weights = [], []
    for mag, length in zip((2 * math.sqrt(2), 4 * math.sqrt(2),
                            8 * math.sqrt(2)), (2.0, 4.0, 8.0)):
        nodes += [mag, -mag]
        weights += [length, length]
    grid = modes.ModeSet(1, nodes, weights)
    b = fock.enumerate_basis(6, 6)
    base = modes.FormFactorSpec("nelson_sharp", sigma=2.0, sigma0=1.0,
                                coupling=0.4)
    rows = nelson.fiber_ir_sweep(
        0.0, [base.replace(sigma=s) for s in (2.0, 4.0, 8.0, 16.0)],
        [grid] * 4, b)
    ren = [r["lambda0_renorm"] for r in rows]
    raw = [r["lambda0"] for r in rows]
    diffs = [abs(ren[i] - ren[i + 1]) for i in range(3)]
    ratio = (raw[0] - raw[-1]) / max(max(ren) - min(ren), 1e-300)
    uv_ok = diffs[0] > diffs[1] > diffs[2] and ratio > 10.0

    ir_grid = modes.log_grid(1, 0.07, 0.3, 6)
    ir_base = modes.FormFactorSpec("nelson_sharp", sigma=1.0, sigma0=0.2,
                                   coupling=0.4)
    ir_rows = nelson.fiber_ir_sweep(
        0.4, [ir_base.replace(sigma0=s0) for s0 in (0.2, 0.1, 0.05)],
        [ir_grid] * 3, b)
    nums = [r["num_expect"] for r in ir_rows]
    ir_ok = all(a <= b_ for a, b_ in zip(nums, nums[1:])) and nums[-1] > nums[0]
    dt = time.perf_counter() - t0
    ok = uv_ok and ir_ok and dt < 60.0
    return ok, ("subtracted steps %s, raw/renorm ratio %.1f; "
                "soft <N> %s in %.1f s"
                % (" > ".join("%.2g" % d for d in diffs), ratio,
                   " -> ".join("%.3g" % n for n in nums), dt))


def check_pull_through_residual():
    """Ground-pair pull-through residual of the standard model."""
    spin = sb.SpinSpace(SZ, SX)
    ms = modes.ModeSet(1, [1.0], [1.0])
    b = fock.enumerate_basis(1, 14)
    v = np.array([0.8 + 0j])
    H = sb.assemble_sb(spin, v, ms, b)
    vals, vecs, _ = lowest_eigenpairs(H, k=1, tol=1e-10)
    r = sb.pull_through_residual(spin, v, ms, b, (vals[0], vecs[:, 0]))
    return float(r.max()) <= 1e-6, "max residual %.2g" % float(r.max())


CHECKS = [
    ("source-model ground energy", check_source_ground_energy),
    ("coherent ground state", check_coherent_ground_state),
    ("exponential-vector eigenrelation", check_exponential_eigenrelation),
    ("metric unipotence and group laws", check_metric_unipotence_group_laws),
    ("mollified inner products", check_mollified_inner_products),
    ("self-energy closed form", check_self_energy_closed_form),
    ("spectral calculus recovery and bound", check_spectral_calculus),
    ("renormalized vacuum damping", check_vacuum_damping),
    ("energy-preserving sums", check_energy_preserving_sums),
    ("dressing commutation identities", check_commutation_identities),
    ("soft-boson divergence", check_soft_boson_divergence),
    ("dressed-family resolvent convergence", check_dressed_family_resolvents),
    ("fiber cutoff sweeps", check_fiber_cutoff_sweeps),
    ("pull-through residual", check_pull_through_residual),
]


def run_suite():
    """Run every check; one verdict line each; exit code 0 iff all pass."""
    t_all = time.perf_counter()
    failures = 0
    width = max(len(name) for name, _ in CHECKS)
    for i, (name, fn) in enumerate(CHECKS, start=1):
        t0 = time.perf_counter()
        try:
            ok, detail = fn()
        except Exception as exc:  # noqa: BLE001 - a crash is a failure
            ok, detail = False, "raised %s: %s" % (type(exc).__name__, exc)
        dt = time.perf_counter() - t0
        verdict = "PASS" if ok else "FAIL"
        if not ok:
            failures += 1
        print("[%2d/%d] %s  %-*s  %s  (%.2f s)"
              % (i, len(CHECKS), verdict, width, name, detail, dt))
    total = time.perf_counter() - t_all
    print("suite: %d/%d passed in %.1f s"
          % (len(CHECKS) - failures, len(CHECKS), total))
    return 0 if failures == 0 else 1
