"""Static SVG diagnostics. Each figure is drawn from the rows written to its CSV."""
from __future__ import annotations

import csv
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

matplotlib.rcParams["svg.hashsalt"] = "waverobe"
matplotlib.rcParams["svg.fonttype"] = "none"

_COLORS = {"CL": "tab:blue", "MAD": "tab:green", "CR": "tab:red"}


def _read(path) -> list:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def _save(fig, path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def scale_diagram(csv_path, svg_path) -> None:
    """log2 sigma2_hat_j against j, regression range drawn solid."""
    rows = _read(csv_path)
    by_kind = defaultdict(list)
    for r in rows:
        by_kind[r["estimator"]].append(r)
    fig, ax = plt.subplots(figsize=(6, 4))
    for kind, rs in by_kind.items():
        j = [int(r["j"]) for r in rs]
        y = [float(r["log2_sigma2"]) for r in rs]
        ax.plot(j, y, ":", color=_COLORS.get(kind), alpha=0.6)
        sel = [(a, b) for a, b, r in zip(j, y, rs) if r["in_regression"] == "1"]
        if sel:
            ax.plot(*zip(*sel), "o-", color=_COLORS.get(kind), label=kind)
    ax.set_xlabel("scale j")
    ax.set_ylabel("log2 sigma2_j")
    ax.legend()
    _save(fig, svg_path)


def ci_ladder(csv_path, svg_path) -> None:
    """Per J0, one CI per estimator, side by side."""
    rows = _read(csv_path)
    kinds = list(dict.fromkeys(r["estimator"] for r in rows))
    width = 0.6 / max(len(kinds), 1)
    fig, ax = plt.subplots(figsize=(7, 4))
    for i, kind in enumerate(kinds):
        rs = [r for r in rows if r["estimator"] == kind]
        x = [int(r["j0"]) + (i - (len(kinds) - 1) / 2) * width for r in rs]
        d = [float(r["d_hat"]) for r in rs]
        has_ci = [r["lo"] != "" for r in rs]
        lo = [float(r["lo"]) if h else v for r, h, v in zip(rs, has_ci, d)]
        hi = [float(r["hi"]) if h else v for r, h, v in zip(rs, has_ci, d)]
        ax.errorbar(x, d, yerr=[[a - b for a, b in zip(d, lo)], [b - a for a, b in zip(d, hi)]],
                    fmt="o", capsize=3, color=_COLORS.get(kind), label=kind)
    ax.set_xlabel("J0")
    ax.set_ylabel("d_hat")
    ax.legend()
    _save(fig, svg_path)


def density_plot(csv_paths: dict, svg_path, title: str = "") -> None:
    """Overlay KDE curves; ``csv_paths`` maps a label to a density CSV."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, path in csv_paths.items():
        rows = [r for r in _read(path) if r["x"] != ""]
        kind = label.split()[0]
        ax.plot([float(r["x"]) for r in rows], [float(r["kde"]) for r in rows],
                color=_COLORS.get(kind), label=label)
    ax.axvline(0.0, color="0.5", lw=0.8)
    ax.set_xlabel("sqrt(n 2^-J0) (d_hat - d)")
    ax.set_ylabel("density")
    if title:
        ax.set_title(title)
    ax.legend()
    _save(fig, svg_path)
