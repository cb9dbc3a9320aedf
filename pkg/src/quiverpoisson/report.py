"""Report rendering for the numeric verification commands.

Each report is a CSV of per-sample records plus a small matplotlib figure
saved next to it, so a run leaves both machine-readable and eyeball-able
artifacts in the chosen directory.
"""

from __future__ import annotations

import csv
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


def write_csv(outdir: str, name: str, fieldnames, rows) -> str:
    os.makedirs(outdir, exist_ok=True)
    path = os.path.join(outdir, f"{name}.csv")
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    return path


def residual_figure(outdir: str, name: str, rows, value_key: str,
                    tolerance: float | None = None, title: str = "") -> str:
    os.makedirs(outdir, exist_ok=True)
    path = os.path.join(outdir, f"{name}.png")
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    xs = [row["sample"] for row in rows]
    ys = [max(float(row[value_key]), 1e-300) for row in rows]
    ax.semilogy(xs, ys, "o", color="tab:blue", label=value_key)
    if tolerance is not None:
        ax.axhline(tolerance, color="tab:red", linestyle="--",
                   label=f"tolerance {tolerance:g}")
    ax.set_xlabel("sample")
    ax.set_ylabel(value_key)
    ax.set_title(title or name)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def rank_figure(outdir: str, name: str, rows, title: str = "") -> str:
    os.makedirs(outdir, exist_ok=True)
    path = os.path.join(outdir, f"{name}.png")
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    xs = [row["sample"] for row in rows]
    ys = [int(row["rank"]) for row in rows]
    ax.plot(xs, ys, "s", color="tab:green")
    full = max(int(row["dimension"]) for row in rows)
    ax.axhline(full, color="tab:gray", linestyle=":", label="ambient dim")
    ax.set_xlabel("sample")
    ax.set_ylabel("rank")
    ax.set_ylim(-0.5, full + 0.5)
    ax.set_title(title or name)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
