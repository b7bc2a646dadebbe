"""Experiment runner: sweep execution, deterministic CSV, figures.

Subcommands:
  run              execute a sweep config, write CSV (+ figures)
  validate-config  parse and check a config, print a summary
  suite            run the acceptance battery, exit 0 iff all pass
"""

import argparse
import concurrent.futures as cf
import math
import os
import sys
import time

import numpy as np
from scipy import sparse
import scipy.linalg

from . import config as config_mod
from . import convergence, fock, nelson, spinboson, vhm
from .dressing import metric_tail_bound, renorm_metric
from .fock import FockBasis
from .linalg import canonical_phase, lowest_eigenpairs
from .modes import gross_config, sample_form_factor, vhm_ground_config

CSV_HEADER = ("model,sweep_param,sweep_value,mu,modes,nmax,dim,sigma,sigma0,"
              "e0,gap,num_expect,vac_overlap,resolvent_gap,tail_bound,"
              "metric_cond,runtime_ms")

RESOLVENT_SHIFT = 1j


def _fmt(x):
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return "%d" % x
    return "%.17g" % x


class PointResult:
    """One executed sweep point: the CSV row fields plus the operator used
    for cross-point resolvent comparisons."""

    def __init__(self, row, operator, basis, spin_dim=1):
        self.row = row
        self.operator = operator
        self.basis = basis
        self.spin_dim = spin_dim


def _eigs(H, cfg):
    k = max(2, cfg.solver["k_lowest"])
    k = min(k, H.shape[0])
    return lowest_eigenpairs(H, k=k, tol=cfg.solver["tol"],
                             seed=cfg.solver["seed"],
                             maxiter=cfg.solver["max_iter"])


def _spin_ground(spin):
    vals, vecs = scipy.linalg.eigh(spin.A)
    return canonical_phase(vecs[:, 0])


def _run_point(cfg, i):
    t0 = time.perf_counter()
    pt = cfg.point(i)
    modes = cfg.modes_for(pt["nodes"])
    basis = FockBasis(len(modes), pt["nmax"])
    ff = cfg.form_factor_for(pt["sigma"], pt["sigma0"])
    v = sample_form_factor(ff, modes)
    model_name = cfg.model
    spin_dim = 1

    if model_name == "vhm":
        m = vhm.assemble_vhm(v, modes, basis)
        op = m.H.mat + (-m.ground_energy_formula) * sparse.identity(
            basis.dim, dtype=complex, format="csr")
        vals, vecs, _ = _eigs(m.H.mat, cfg)
        x0 = vecs[:, 0]
        e0 = float(vals[0])
        vac = basis.vacuum()
        num = fock.number_operator(basis).mat
        g = vhm_ground_config(v, modes)
        cond = renorm_metric(g, basis, cond_warn=math.inf).cond
        tail = metric_tail_bound(g, basis)
        num_expect = float(np.vdot(x0, num @ x0).real)
        vac_overlap = float(abs(np.vdot(vac, x0)))

    elif model_name in ("sb", "doi-demo"):
        spin = cfg.spin()
        spin_dim = spin.dim
        g = vhm_ground_config(v, modes)
        if model_name == "sb":
            ct = spinboson.counterterm(v, modes)
            btb = spin.B.conj().T @ spin.B
            op = spinboson.assemble_sb(spin, v, modes, basis) + ct * \
                sparse.kron(sparse.csr_matrix(btb),
                            sparse.identity(basis.dim, dtype=complex,
                                            format="csr"), format="csr")
            metric = spinboson.sb_metric(spin, g, basis, cond_warn=math.inf)
        else:
            singular = cfg.model_params["kernel"] == "singular"
            _, h_hat, metric = spinboson.renormalized_sb(
                spin, v, modes, basis, g=g, singular=singular)
            op = sparse.csr_matrix(h_hat)
        vals, vecs, _ = _eigs(op, cfg)
        x0 = vecs[:, 0]
        e0 = float(vals[0])
        chi0 = _spin_ground(spin)
        vac = np.kron(chi0, basis.vacuum())
        num = sparse.kron(sparse.identity(spin.dim, dtype=complex),
                          fock.number_operator(basis).mat, format="csr")
        cond = metric.cond
        tail = metric_tail_bound(g, basis)
        num_expect = float(np.vdot(x0, num @ x0).real)
        vac_overlap = float(abs(np.vdot(vac, x0)))

    elif model_name == "nelson-fiber":
        m = nelson.assemble_fiber(cfg.model_params["P"], ff, modes, basis)
        op = m.K - m.E_counterterm * sparse.identity(basis.dim,
                                                     dtype=complex,
                                                     format="csr")
        vals, vecs, _ = _eigs(op, cfg)
        x0 = vecs[:, 0]
        e0 = float(vals[0])
        vac = basis.vacuum()
        num = fock.number_operator(basis).mat
        g = gross_config(v, modes)
        cond = renorm_metric(g, basis, cond_warn=math.inf).cond
        tail = metric_tail_bound(g, basis)
        num_expect = float(np.vdot(x0, num @ x0).real)
        vac_overlap = float(abs(np.vdot(vac, x0)))

    else:  # pragma: no cover - guarded by config validation
        raise ValueError("unknown model %r" % model_name)

    gap = float(vals[1] - vals[0]) if len(vals) > 1 else math.nan
    row = {
        "model": model_name,
        "sweep_param": cfg.sweep_param,
        "sweep_value": (int(cfg.sweep_values[i])
                        if cfg.sweep_param in ("nmax", "nodes")
                        else float(cfg.sweep_values[i])),
        "mu": float(cfg.grid["mu"]),
        "modes": len(modes),
        "nmax": int(pt["nmax"]),
        "dim": basis.dim * spin_dim,
        "sigma": float(pt["sigma"]),
        "sigma0": float(pt["sigma0"]),
        "e0": e0,
        "gap": gap,
        "num_expect": num_expect,
        "vac_overlap": vac_overlap,
        "resolvent_gap": math.nan,
        "tail_bound": tail,
        "metric_cond": cond,
    }
    row["runtime_ms"] = 1000.0 * (time.perf_counter() - t0)
    return PointResult(row, sparse.csr_matrix(op), basis, spin_dim=spin_dim)


def _resolvent_gaps(results, sweep_param):
    """Fill the resolvent_gap column by embedding into the largest space."""
    if len(results) < 2:
        for r in results:
            r.row["resolvent_gap"] = 0.0
        return
    dims = [r.operator.shape[0] for r in results]
    if len(set(dims)) == 1:
        fam = convergence.EmbeddedOperatorFamily(dims[0])
        for r in results:
            fam.add(r.operator)
        gaps = convergence.resolvent_distance(fam, z=RESOLVENT_SHIFT,
                                              mode="norm")
    elif sweep_param == "nmax":
        # nested bases: occupation tuples of the small cap are a subset of
        # the large one, so 0/1 embeddings are exact isometries
        big = max(results, key=lambda r: r.basis.cap)
        fam = convergence.EmbeddedOperatorFamily(big.operator.shape[0])
        for r in results:
            emb = fock.embedding(r.basis, big.basis)
            if r.spin_dim > 1:
                emb = sparse.kron(sparse.identity(r.spin_dim, dtype=complex),
                                  emb, format="csr")
            fam.add(r.operator, iota=emb.toarray())
        gaps = convergence.resolvent_distance(fam, z=RESOLVENT_SHIFT,
                                              mode="norm")
    else:
        # node-count sweeps change the one-particle space itself; there is
        # no canonical isometry between different grids, so no gap
        gaps = [math.nan] * len(results)
    for r, gval in zip(results, gaps):
        r.row["resolvent_gap"] = float(gval)


def run_sweep(cfg, threads=None, seed=None):
    """Execute all sweep points; returns (rows, failures).

    failures is a list of (point index, exception); rows contains only the
    successful points, in input order.
    """
    if seed is not None:
        cfg.solver["seed"] = int(seed)
    if threads is None:
        threads = int(os.environ.get("RENORMFOCK_THREADS", "0")) or \
            min(8, os.cpu_count() or 1)
    threads = max(1, int(threads))
    npts = len(cfg.sweep_values)
    results = [None] * npts
    failures = []
    if threads == 1:
        for i in range(npts):
            try:
                results[i] = _run_point(cfg, i)
            except Exception as exc:  # noqa: BLE001 - reported to the user
                failures.append((i, exc))
    else:
        with cf.ThreadPoolExecutor(max_workers=threads) as pool:
            futs = {pool.submit(_run_point, cfg, i): i for i in range(npts)}
            for fut in cf.as_completed(futs):
                i = futs[fut]
                try:
                    results[i] = fut.result()
                except Exception as exc:  # noqa: BLE001
                    failures.append((i, exc))
    done = [r for r in results if r is not None]
    if not failures:
        _resolvent_gaps(done, cfg.sweep_param)
    rows = [r.row for r in done]
    return rows, sorted(failures)


def write_csv(rows, path):
    cols = CSV_HEADER.split(",")
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row[c]) for c in cols) + "\n")


def _cmd_run(args):
    cfg = config_mod.load_config(args.config)
    out = args.out or cfg.output_path
    if not out:
        print("error: no output path (use --out or [output] path)",
              file=sys.stderr)
        return 2
    rows, failures = run_sweep(cfg, threads=args.threads, seed=args.seed)
    if failures:
        partial = out + ".partial"
        write_csv(rows, partial)
        idx, exc = failures[0]
        print("error: sweep point %d failed: %s" % (idx, exc),
              file=sys.stderr)
        print("partial results (%d/%d points) written to %s"
              % (len(rows), len(cfg.sweep_values), partial), file=sys.stderr)
        return 1
    write_csv(rows, out)
    print("wrote %d rows to %s" % (len(rows), out))
    if not args.no_figures:
        from . import figures
        for p in figures.render_figures(rows, out):
            print("wrote %s" % p)
    return 0


def _cmd_validate(args):
    try:
        cfg = config_mod.load_config(args.config)
    except config_mod.ConfigError as exc:
        print("invalid: %s" % exc, file=sys.stderr)
        return 1
    print("ok: %s" % config_mod.summarize(cfg))
    return 0


def _cmd_suite(args):
    from .suite import run_suite
    return run_suite()


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="renormfock",
        description="Truncated-Fock renormalization experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a sweep config")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default=None,
                       help="CSV output path (overrides [output] path)")
    p_run.add_argument("--threads", type=int, default=None,
                       help="worker threads (default RENORMFOCK_THREADS "
                            "or cpu count, max 8)")
    p_run.add_argument("--seed", type=int, default=None,
                       help="override [solver] seed")
    p_run.add_argument("--no-figures", action="store_true",
                       help="skip rendering diagnostic figures")
    p_run.set_defaults(func=_cmd_run)

    p_val = sub.add_parser("validate-config", help="check a config file")
    p_val.add_argument("--config", required=True)
    p_val.set_defaults(func=_cmd_validate)

    p_suite = sub.add_parser("suite",
                             help="run the full acceptance battery")
    p_suite.set_defaults(func=_cmd_suite)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except config_mod.ConfigError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
