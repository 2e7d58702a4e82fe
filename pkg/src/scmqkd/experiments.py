"""Figure-reproduction sweeps.  Each returns a :class:`Table`."""
from __future__ import annotations

import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .config import ExperimentConfig
from .intermod import intermod_noise_ratio, noise_profile
from .security import (GainUndefinedError, multichannel_gain, single_channel_rate,
                       total_key_rate)


@dataclass
class Table:
    title: str
    columns: list[str]
    rows: list[list] = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [row[i] for row in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# {self.title}\n")
        buf.write("# config: " + " ".join(f"{k}={_fmt(v)}" for k, v in self.provenance.items()) + "\n")
        buf.write(",".join(self.columns) + "\n")
        for row in self.rows:
            buf.write(",".join(_fmt(v) for v in row) + "\n")
        return buf.getvalue()

    def write(self, path: Path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_csv())


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return "nan" if v != v else f"{v:.12g}"
    return str(v)


def _map(fn, items, workers):
    # rows are collected in input order whatever the completion order
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def noise_profile_table(cfg: ExperimentConfig) -> Table:
    """Per-channel noise ratio (no sweep) or first/last channel vs m_bar."""
    if cfg.sweep is None:
        plans = cfg.channel_plans()
        if len(plans) != 1:
            raise ValueError("per-channel noise profile takes exactly one plan")
        prof = noise_profile(plans[0], cfg.modulation())
        rows = [[k, m2, ratio] for k, m2, ratio in prof.rows()]
        return Table("noise-profile per channel", ["k", "M2", "epsilon_ratio"], rows, cfg.resolved())
    if cfg.sweep != "mbar":
        raise ValueError("noise-profile sweeps only over mbar")
    rows = []
    for plan in cfg.channel_plans():
        n = plan.n_channels
        for mbar in cfg.grid():
            mod = cfg.modulation(float(mbar))
            rows.append([n, float(mbar), intermod_noise_ratio(plan, 1, mod),
                         intermod_noise_ratio(plan, n, mod)])
    return Table("noise-profile vs mbar", ["N", "m_bar", "ratio_first", "ratio_last"],
                 rows, cfg.resolved())


def _keyrate_row(args):
    cfg, distance = args
    params, det, link = cfg.protocol(), cfg.detector(), cfg.link(distance)
    mod = cfg.modulation()
    row = [distance, link.transmittance]
    for plan in cfg.channel_plans():
        r_tot, per = total_key_rate(plan, mod, params, link, det)
        for res in per:
            row += [res.key_rate_bits_per_pulse, res.key_rate_bits_per_sec]
        row.append(r_tot)
    sc = single_channel_rate(params, link, det)
    row += [sc.key_rate_bits_per_pulse, sc.key_rate_bits_per_sec]
    return row


def keyrate_table(cfg: ExperimentConfig) -> Table:
    """Per-channel rates, plan totals and the single-channel reference vs distance."""
    if cfg.sweep != "distance":
        raise ValueError("keyrate needs --sweep distance")
    columns = ["distance_km", "transmittance"]
    for plan in cfg.channel_plans():
        n = plan.n_channels
        for k in plan.indices():
            columns += [f"N{n}_k{k}_bits_per_pulse", f"N{n}_k{k}_bits_per_s"]
        columns.append(f"N{n}_total_bits_per_s")
    columns += ["single_bits_per_pulse", "single_bits_per_s"]
    rows = _map(_keyrate_row, [(cfg, float(d)) for d in cfg.grid()], cfg.workers)
    return Table("keyrate vs distance", columns, rows, cfg.resolved())


def _gain_row(args):
    cfg, axis = args
    if cfg.sweep == "mbar":
        mod, link = cfg.modulation(axis), cfg.link(cfg.distance)
    else:
        mod, link = cfg.modulation(), cfg.link(axis)
    params, det = cfg.protocol(), cfg.detector()
    row = [axis]
    for plan in cfg.channel_plans():
        try:
            row.append(multichannel_gain(plan, mod, params, link, det))
        except GainUndefinedError:
            row.append(float("nan"))
    row.append(single_channel_rate(params, link, det).key_rate_bits_per_sec)
    return row


def gain_table(cfg: ExperimentConfig) -> Table:
    """Multi-channel gain vs m_bar (at fixed distance) or vs distance (at fixed m_bar).

    ``nan`` marks points where the single-channel rate is zero.
    """
    if cfg.sweep not in ("mbar", "distance"):
        raise ValueError("gain needs --sweep mbar or --sweep distance")
    axis = "m_bar" if cfg.sweep == "mbar" else "distance_km"
    columns = [axis] + [f"G_M_N{p.n_channels}" for p in cfg.channel_plans()] + ["single_bits_per_s"]
    rows = _map(_gain_row, [(cfg, float(x)) for x in cfg.grid()], cfg.workers)
    return Table(f"gain vs {cfg.sweep}", columns, rows, cfg.resolved())
