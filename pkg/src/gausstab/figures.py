"""Matplotlib renderings of reports, written next to the data files."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_spectrum_figure(report, path):
    """Computed eigenvalues as dots, analytic cluster levels as dashes."""
    lam = report["spectrum"]["eigenvalues"]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(range(len(lam)), lam, "o", ms=5, label="computed")
    analytic = report.get("analytic", {})
    if analytic.get("eigenvalues"):
        pred = [row["predicted"] for row in analytic["eigenvalues"]]
        ax.plot(range(len(pred)), pred, "k_", ms=14, mew=1.5, label="closed form")
    ax.axhline(0.0, color="0.7", lw=0.8)
    ax.set_xlabel("eigenvalue index")
    ax.set_ylabel(r"$\lambda_k$")
    kind = report["config"].get("surface.kind", "")
    tag = "constrained" if report["spectrum"]["constrained"] else "unconstrained"
    ax.set_title(f"{kind}: {tag} spectrum")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_margins_figure(report, path):
    """Horizontal margin bars per estimate, grey when hypotheses failed."""
    reps = report["estimates"]
    if not reps:
        return
    names = [r["name"] for r in reps]
    margins = [r["margin"] for r in reps]
    colors = [
        ("tab:green" if r["margin"] >= 0 else "tab:red") if r["hypothesis_ok"] else "0.6"
        for r in reps
    ]
    fig, ax = plt.subplots(figsize=(6.5, 0.6 * len(reps) + 1.2))
    y = np.arange(len(reps))
    ax.barh(y, margins, color=colors)
    ax.axvline(0.0, color="k", lw=0.8)
    ax.set_yticks(y, names)
    ax.set_xlabel("margin  (rhs - lhs)")
    ax.set_xscale("symlog", linthresh=1e-3)
    ax.set_title("estimate battery (grey: hypotheses not met)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_convergence_figure(rows, path):
    """Error curves against refinement level on a log scale."""
    rows = [r for r in rows if not r.get("error")]
    if not rows:
        return
    levels = [r["level"] for r in rows]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    series = [
        ("lambda1_rel_err", "lowest eigenvalue rel. err."),
        ("translation_residual", "translation residual"),
        ("crit_residual", "criticality residual"),
    ]
    for key, label in series:
        vals = [(lvl, r[key]) for lvl, r in zip(levels, rows) if r.get(key) not in (None, "")]
        if vals:
            xs, ys = zip(*vals)
            positive = [max(y, 1e-17) for y in ys]
            ax.semilogy(xs, positive, "o-", label=label)
    ax.set_xlabel("refinement level")
    ax.set_ylabel("error")
    ax.set_xticks(levels)
    ax.legend(frameon=False)
    ax.set_title("refinement convergence")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
