"""Diagnostic figures rendered next to the CSV output.

The delimited file remains the interface; these plots are a convenience
for eyeballing sweep trends (ground energy stabilization, soft-boson
growth, resolvent gaps) without firing up a notebook.
"""

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402 - backend must be set first


def _finite(rows, key):
    xs, ys = [], []
    for row in rows:
        y = row[key]
        try:
            bad = y != y  # NaN
        except TypeError:
            bad = True
        if not bad:
            xs.append(row["sweep_value"])
            ys.append(y)
    return xs, ys


def render_figures(rows, csv_path):
    """Write spectrum and diagnostics PNGs beside ``csv_path``.

    Returns the list of files written; empty for empty sweeps.
    """
    if not rows:
        return []
    stem, _ = os.path.splitext(csv_path)
    param = rows[0]["sweep_param"]
    model = rows[0]["model"]
    written = []

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    xs, ys = _finite(rows, "e0")
    ax.plot(xs, ys, "o-", label="ground energy")
    xs, ys = _finite(rows, "gap")
    ax.plot(xs, ys, "s--", label="spectral gap")
    ax.set_xlabel(param)
    ax.set_title("%s sweep: low spectrum" % model)
    ax.legend()
    fig.tight_layout()
    path = stem + "_spectrum.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)

    fig, axes = plt.subplots(1, 2, figsize=(9.0, 4.0))
    xs, ys = _finite(rows, "num_expect")
    axes[0].plot(xs, ys, "o-", label="boson number")
    xs, ys = _finite(rows, "vac_overlap")
    axes[0].plot(xs, ys, "s--", label="vacuum overlap")
    axes[0].set_xlabel(param)
    axes[0].legend()
    axes[0].set_title("ground-state structure")
    for key, style in (("resolvent_gap", "o-"), ("tail_bound", "s--")):
        xs, ys = _finite(rows, key)
        pos = [(x, y) for x, y in zip(xs, ys) if y > 0]
        if pos:
            axes[1].semilogy([p[0] for p in pos], [p[1] for p in pos],
                             style, label=key)
    axes[1].set_xlabel(param)
    axes[1].legend()
    axes[1].set_title("convergence diagnostics")
    fig.tight_layout()
    path = stem + "_diagnostics.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)
    return written
