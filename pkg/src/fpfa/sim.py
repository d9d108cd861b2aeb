"""Monte Carlo orchestration: one drop through the full pipeline, and parameter sweeps."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .channel import ArraySpec, BandSpec, UserPaths, channel_row, drop_users, make_bands, pseudo_channel
from .config import ConfigError, ScenarioConfig
from .freq_alloc import correlation_matrix, group_users
from .metrics import LinkReport, group_sinr, noise_power, power_consumption
from .port_select import PortSelection, fixed_ports, processing_order, select_ports
from .precoder import SingularGroupError, allocate_power, build_precoder

log = logging.getLogger(__name__)


def _serve_group(
    selection: PortSelection, rf_chains: int, amplitude: np.ndarray, noise: float
) -> tuple[dict[int, float], list[int]]:
    """Precode one group, dropping the weakest users until ZF exists."""
    users = list(selection.users)
    h = selection.channels
    dropped: list[int] = []
    while users:
        try:
            pre = build_precoder(h, tuple(users), rf_chains, amplitude[: len(users)])
            break
        except SingularGroupError:
            weakest = int(np.argmin(np.linalg.norm(h, axis=1)))
            dropped.append(users.pop(weakest))
            h = np.delete(h, weakest, axis=0)
    else:
        return {}, dropped
    gamma = group_sinr(h, pre.effective, pre.power, noise)
    return dict(zip(users, gamma.tolist())), dropped


def _tensors(users: list[UserPaths], band: BandSpec, array: ArraySpec):
    return [pseudo_channel(u, band, array) for u in users]


def run_drop(config: ScenarioConfig, arch: str, seed: int) -> LinkReport:
    """Drop users with ``seed`` and evaluate architecture ``arch`` on them."""
    users = drop_users(config, seed)
    u = config.n_users
    bands = make_bands(config)
    amplitude = allocate_power(u, config.tx_power_w)
    rf = config.rf_chains(arch)

    sinr = np.zeros(u)
    band_of = np.zeros(u, dtype=int)
    port_of = np.zeros(u, dtype=int)
    outage: list[int] = []

    if arch == "fpfa":
        array = ArraySpec(config.n_antennas, config.n_bands, rf, config.n_ports, config.port_line_length)
        tensors = {b.index: _tensors(users, b, array) for b in bands}
        ref = tensors[config.alloc_band_index]
        corr = correlation_matrix(np.array([channel_row(t, 1) for t in ref]))
        groups = group_users(corr, config.n_bands, rf).groups
        served_bands = [(bands[k], list(g)) for k, g in enumerate(groups)]
    elif arch in ("pfa", "fixed"):
        n_ports = config.n_ports if arch == "pfa" else 1
        array = ArraySpec(config.n_antennas, 1, rf, n_ports, config.port_line_length)
        band = bands[config.pfa_band_index]
        band = BandSpec(0, band.center_freq, band.bandwidth)
        tensors = {0: _tensors(users, band, array)}
        served_bands = [(band, list(range(u)))]
    else:
        raise ConfigError(f"unknown architecture {arch!r}")

    noise = np.array([noise_power(b.bandwidth, config.noise_figure_db, config.temperature_k) for b, _ in served_bands])
    bandwidth = np.array([b.bandwidth for b, _ in served_bands])
    for slot, (band, members) in enumerate(served_bands):
        if not members:
            continue
        group = [tensors[band.index][i] for i in members]
        if arch == "fixed":
            selection = fixed_ports(group)
        else:
            selection = select_ports(group, config.user_order, config.port_metric)
        served, dropped = _serve_group(selection, rf, amplitude[members], noise[slot])
        for user, port in zip(selection.users, selection.ports):
            band_of[user] = slot
            port_of[user] = port
        for user, g in served.items():
            sinr[user] = g
        for user in dropped:
            port_of[user] = 0
        outage.extend(dropped)

    power = power_consumption(arch, u, config.n_antennas, config.n_bands)
    return LinkReport(arch, seed, sinr, band_of, port_of, noise, bandwidth, power, tuple(sorted(outage)))


# ---------------------------------------------------------------- sweeps

@dataclass(frozen=True)
class DropRecord:
    value: float
    arch: str
    drop: int
    sum_se: float
    ee: float
    throughput: float
    power_w: float
    outage: bool


@dataclass
class SweepReport:
    axis: str
    values: tuple[float, ...]
    archs: tuple[str, ...]
    records: list[DropRecord]

    def select(self, value: float, arch: str) -> list[DropRecord]:
        return [r for r in self.records if r.value == value and r.arch == arch]

    def mean_sum_se(self, value: float, arch: str) -> float:
        return float(np.mean([r.sum_se for r in self.select(value, arch)]))

    def mean_ee(self, value: float, arch: str) -> float:
        return float(np.mean([r.ee for r in self.select(value, arch)]))

    def statistics(self, value: float, arch: str) -> dict[str, float]:
        recs = self.select(value, arch)
        se = np.array([r.sum_se for r in recs])
        outages = sum(r.outage for r in recs)
        return {
            "sum_se_mean": float(se.mean()),
            "sum_se_p10": float(np.percentile(se, 10)),
            "sum_se_p90": float(np.percentile(se, 90)),
            "ee_mean": float(np.mean([r.ee for r in recs])),
            "throughput_mean": float(np.mean([r.throughput for r in recs])),
            "power_w": float(recs[0].power_w),
            "outage_drops": float(outages),
            "clean_drops": float(len(recs) - outages),
            "drops": float(len(recs)),
        }

    def rows(self):
        for value in self.values:
            for arch in self.archs:
                for stat, v in self.statistics(value, arch).items():
                    yield value, arch, stat, v

    def to_csv(self) -> str:
        lines = ["axis,value,arch,statistic,result"]
        for value, arch, stat, v in self.rows():
            lines.append(f"{self.axis},{value:.9g},{arch},{stat},{v:.9g}")
        return "\n".join(lines) + "\n"

    def summary(self) -> str:
        lines = [f"sweep over {self.axis}"]
        header = f"{'value':>10}  {'arch':<6} {'sum SE':>10} {'p10':>10} {'p90':>10} {'EE':>12} {'outage':>6}"
        lines.append(header)
        for value in self.values:
            for arch in self.archs:
                s = self.statistics(value, arch)
                lines.append(
                    f"{value:>10.6g}  {arch:<6} {s['sum_se_mean']:>10.5g} {s['sum_se_p10']:>10.5g} "
                    f"{s['sum_se_p90']:>10.5g} {s['ee_mean']:>12.5g} {int(s['outage_drops']):>6d}"
                )
        return "\n".join(lines) + "\n"


def _drop_task(args: tuple[ScenarioConfig, float, int]) -> list[DropRecord]:
    config, value, drop = args
    out = []
    for arch in config.arch:
        rep = run_drop(config, arch, config.seed + drop)
        out.append(
            DropRecord(value, arch, drop, rep.sum_se, rep.ee, rep.throughput, rep.power_w, rep.outage)
        )
    return out


def run_sweep(config: ScenarioConfig) -> SweepReport:
    """Paired drops (seed = base seed + drop index) at every sweep point and architecture."""
    if not config.sweep_values:
        raise ConfigError("empty sweep")
    tasks = []
    for value in config.sweep_values:
        point = config.at_sweep_point(value)
        tasks.extend((point, float(value), d) for d in range(config.drops))

    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            chunks = list(pool.map(_drop_task, tasks, chunksize=max(1, len(tasks) // (4 * config.workers))))
    else:
        chunks = [_drop_task(t) for t in tasks]
    records = [r for chunk in chunks for r in chunk]
    order = {a: i for i, a in enumerate(config.arch)}
    vorder = {float(v): i for i, v in enumerate(config.sweep_values)}
    records.sort(key=lambda r: (vorder[r.value], order[r.arch], r.drop))
    return SweepReport(config.sweep, tuple(float(v) for v in config.sweep_values), tuple(config.arch), records)


def write_outputs(report: SweepReport, out_dir: str | Path, plots: bool = True) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = [out / "sweep.csv", out / "summary.txt"]
    written[0].write_text(report.to_csv())
    written[1].write_text(report.summary())
    if plots:
        try:
            written.extend(_plot(report, out))
        except Exception:  # the CSV is the contract; plots are best effort
            log.warning("plot emission failed", exc_info=True)
    return written


_AXIS_LABEL = {
    "transmit_power": "Transmit power [dBm]",
    "user_count": "Number of users",
    "antenna_count": "Number of BS antennas",
}


def _plot(report: SweepReport, out: Path) -> list[Path]:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    paths = []
    x = np.array(report.values)
    for name, key, ylabel in (
        ("sum_se.svg", "sum_se", "Sum SE [bit/s/Hz]"),
        ("energy_efficiency.svg", "ee", "Energy efficiency [bit/s/Hz/W]"),
    ):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        for arch in report.archs:
            per_point = [np.array([getattr(r, key) for r in report.select(v, arch)]) for v in report.values]
            mean = np.array([p.mean() for p in per_point])
            ax.plot(x, mean, marker="o", label=arch.upper())
            if key == "sum_se":
                lo = [np.percentile(p, 10) for p in per_point]
                hi = [np.percentile(p, 90) for p in per_point]
                ax.fill_between(x, lo, hi, alpha=0.2)
        ax.set_xlabel(_AXIS_LABEL[report.axis])
        ax.set_ylabel(ylabel)
        ax.grid(True, alpha=0.3)
        ax.legend()
        fig.tight_layout()
        path = out / name
        fig.savefig(path, metadata={"Date": None})
        plt.close(fig)
        paths.append(path)
    return paths




def port_sinr_profile(config: ScenarioConfig, seed: int) -> np.ndarray:
    """SINR of the second user of a two-user drop as its PFA visits every port.

    Single band at the PFA carrier over the whole array; the first user (in
    processing order) stays on port 1. Each port is evaluated through the
    full hybrid precoder.
    """
    cfg = replace(config, n_users=2, arch=("pfa",))
    users = drop_users(cfg, seed)
    band = make_bands(cfg)[cfg.pfa_band_index]
    array = ArraySpec(cfg.n_antennas, 1, 2, cfg.n_ports, cfg.port_line_length)
    tensors = _tensors(users, band, array)
    first, second = processing_order(tensors, cfg.user_order)
    amplitude = allocate_power(2, cfg.tx_power_w)
    noise = noise_power(band.bandwidth, cfg.noise_figure_db, cfg.temperature_k)
    h1 = tensors[first].matrix[0]
    out = np.empty(cfg.n_ports)
    for n, h2 in enumerate(tensors[second].matrix):
        h = np.stack([h1, h2])
        try:
            pre = build_precoder(h, (first, second), 2, amplitude)
            out[n] = group_sinr(h, pre.effective, pre.power, noise)[1]
        except SingularGroupError:
            out[n] = 0.0
    return out


__all__ = ["DropRecord", "SweepReport", "port_sinr_profile", "run_drop", "run_sweep", "write_outputs"]
