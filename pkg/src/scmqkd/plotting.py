"""Static SVG figures drawn from the same tables that go to CSV."""
from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .experiments import Table  # noqa: E402

RC = {
    "font.size": 10,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "lines.linewidth": 1.4,
    "svg.hashsalt": "scmqkd",
}


def _figure():
    golden = (math.sqrt(5) - 1.0) / 2.0
    width = 5.0
    return plt.subplots(figsize=(width, width * golden))


def _save(fig, path: Path) -> None:
    fig.tight_layout()
    # no timestamp, so reruns give identical files
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_noise_profile(table: Table, path: Path) -> None:
    with plt.rc_context(RC):
        fig, ax = _figure()
        if "k" in table.columns:
            ax.plot(table.column("k"), table.column("epsilon_ratio"), "o-", ms=3)
            ax.set_xlabel("channel index k")
        else:
            n_col, mbar, first, last = (table.column(c) for c in table.columns)
            for n in sorted(set(n_col), reverse=True):
                sel = [i for i, v in enumerate(n_col) if v == n]
                ax.plot([mbar[i] for i in sel], [first[i] for i in sel], label=f"N={n}, k=1")
                ax.plot([mbar[i] for i in sel], [last[i] for i in sel], "--", label=f"N={n}, k={n}")
            ax.set_xlabel(r"mean modulation index $\bar m$")
            ax.legend()
        ax.set_ylabel(r"$\epsilon_S / V_A$")
        _save(fig, path)


def plot_keyrate(table: Table, path: Path) -> None:
    """Left: first/last channel of every plan plus single channel. Right: plan totals."""
    with plt.rc_context(RC):
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
        dist = table.column("distance_km")
        totals = [c for c in table.columns if c.endswith("_total_bits_per_s")]
        for col in totals:
            n = int(col[1:].split("_", 1)[0])
            for k in sorted({1, n}):
                ax1.semilogy(dist, _positive(table.column(f"N{n}_k{k}_bits_per_s")), label=f"({n},{k})")
            ax2.semilogy(dist, _positive(table.column(col)), label=f"N={n}")
        single = _positive(table.column("single_bits_per_s"))
        ax1.semilogy(dist, single, "k--", label="single")
        ax2.semilogy(dist, single, "k--", label="single")
        for ax, ylabel in ((ax1, "R_(k) [bit/s]"), (ax2, "R_tot [bit/s]")):
            ax.set_xlabel("distance [km]")
            ax.set_ylabel(ylabel)
            ax.legend()
        _save(fig, path)


def plot_gain(table: Table, path: Path) -> None:
    with plt.rc_context(RC):
        fig, ax = _figure()
        x = table.column(table.columns[0])
        for col in table.columns[1:-1]:
            ax.plot(x, table.column(col), label=col.replace("G_M_", ""))
            ax.axhline(int(col.rsplit("N", 1)[1]), color="0.6", ls="--", lw=0.8)
        ax.set_xlabel("distance [km]" if table.columns[0] == "distance_km" else r"$\bar m$")
        ax.set_ylabel("multi-channel gain $G_M$")
        ax.legend()
        _save(fig, path)


def _positive(values):
    return [v if v > 0 else float("nan") for v in values]
