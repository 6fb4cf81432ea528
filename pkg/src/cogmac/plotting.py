"""Render sweep/validation tables to figure files (headless Agg)."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_METRIC_LABEL = {
    "tau": "transmission probability tau",
    "p_c": "collision probability p_c",
}


def plot_sweep_rows(rows, out_path, title=None):
    """Single-axis sweep: tau and p_c against the swept value."""
    xs = [r.value for r in rows if r.error is None]
    taus = [r.tau for r in rows if r.error is None]
    pcs = [r.p_c for r in rows if r.error is None]
    axis = rows[0].axis if rows else "value"
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(xs, taus, "o-", label="tau")
    ax.plot(xs, pcs, "s--", label="p_c")
    ax.set_xlabel(axis)
    ax.set_ylabel("probability")
    ax.grid(True, alpha=0.4)
    ax.legend()
    if title:
        ax.set_title(title)
    fig.savefig(out_path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def plot_preset_table(preset, header, rows, out_path):
    """One line per curve of a figure preset."""
    xs = [row[0] for row in rows]
    fig, ax = plt.subplots(figsize=(7.5, 5))
    for col, name in enumerate(header[1:], start=1):
        ys = [row[col] for row in rows]
        ax.plot(xs, ys, marker=".", label=name)
    ax.set_xlabel("number of stations n")
    ax.set_ylabel(_METRIC_LABEL.get(preset.metric, preset.metric))
    ax.grid(True, alpha=0.4)
    ax.legend(fontsize=8)
    ax.set_title(f"preset {preset.name}")
    fig.savefig(out_path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def plot_validation_report(labeled_rows, out_path, threshold):
    """Analytic-vs-simulated scatter plus relative errors per comparison.

    labeled_rows: list of (label, ValidationRow).
    """
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4.5))
    seen = set()
    for label, row in labeled_rows:
        kind = row.metric.split("[", 1)[0] if "[" in row.metric else row.metric
        color = {"tau": "tab:blue", "pc_any": "tab:orange"}.get(kind, "tab:gray")
        ax1.plot(row.analytic, row.simulated, "o", color=color, ms=4,
                 label=kind if kind not in seen else None)
        seen.add(kind)
    lim = max((max(r.analytic, r.simulated) for _, r in labeled_rows), default=1.0)
    ax1.plot([0, lim], [0, lim], "k-", lw=0.8)
    ax1.set_xlabel("analytic")
    ax1.set_ylabel("simulated")
    ax1.grid(True, alpha=0.4)
    ax1.legend(fontsize=8)

    errs = [r.rel_err for _, r in labeled_rows]
    ax2.bar(range(len(errs)), errs, color=["tab:red" if r.passed is False
                                           else "tab:green" for _, r in labeled_rows])
    ax2.axhline(threshold, color="k", ls="--", lw=0.8)
    ax2.set_xlabel("comparison index")
    ax2.set_ylabel("relative error")
    ax2.grid(True, alpha=0.4)
    fig.savefig(out_path, dpi=150, bbox_inches="tight")
    plt.close(fig)
