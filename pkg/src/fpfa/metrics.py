"""SINR, spectral efficiency and the hardware power model."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import ConfigError

BOLTZMANN = 1.380649e-23

# unit powers in W, at around 300 GHz
P_PHASE_SHIFTER = 0.042
P_RF_CHAIN = 0.120
P_BASEBAND = 0.200


@dataclass(frozen=True)
class DeviceCounts:
    phase_shifters: int
    rf_chains: int
    basebands: int

    @property
    def power(self) -> float:
        return (
            self.phase_shifters * P_PHASE_SHIFTER
            + self.rf_chains * P_RF_CHAIN
            + self.basebands * P_BASEBAND
        )


@dataclass
class LinkReport:
    arch: str
    seed: int
    sinr: np.ndarray  # per user, linear; 0 for users dropped from service
    band: np.ndarray  # band index serving each user
    port: np.ndarray  # selected port (1-based), 0 when dropped
    noise_power: np.ndarray  # per band in W
    bandwidth: np.ndarray  # per band in Hz
    power_w: float
    outage_users: tuple[int, ...] = field(default_factory=tuple)

    @property
    def se(self) -> np.ndarray:
        return np.log2(1 + self.sinr)

    @property
    def sum_se(self) -> float:
        return float(self.se.sum())

    @property
    def throughput(self) -> float:
        """Bandwidth-weighted rate in bit/s."""
        return float(np.sum(self.se * self.bandwidth[self.band]))

    @property
    def ee(self) -> float:
        return energy_efficiency(self.sum_se, self.power_w)

    @property
    def outage(self) -> bool:
        return bool(self.outage_users)

    def summary(self) -> str:
        lines = [
            f"architecture      {self.arch}",
            f"seed              {self.seed}",
            f"users             {len(self.sinr)} ({len(self.outage_users)} in outage)",
            f"sum SE            {self.sum_se:.6g} bit/s/Hz",
            f"throughput        {self.throughput:.6g} bit/s",
            f"hardware power    {self.power_w:.6g} W",
            f"energy efficiency {self.ee:.6g} bit/s/Hz/W",
            "user  band  port  SINR[dB]     SE",
        ]
        with np.errstate(divide="ignore"):
            db = 10 * np.log10(self.sinr)
        for u in range(len(self.sinr)):
            lines.append(
                f"{u:4d}  {self.band[u]:4d}  {self.port[u]:4d}  {db[u]:8.3f}  {self.se[u]:.6g}"
            )
        return "\n".join(lines)


def noise_power(bandwidth: float, noise_figure_db: float = 7.0, temperature: float = 290.0) -> float:
    return BOLTZMANN * temperature * bandwidth * 10 ** (noise_figure_db / 10)


def group_sinr(h: np.ndarray, effective: np.ndarray, amplitude: np.ndarray, noise: float) -> np.ndarray:
    """SINR of every user in a group.

    ``h`` is U_k x M, ``effective`` the M x U_k product of analog and digital
    precoders, ``amplitude`` the per-user sqrt-power.
    """
    if noise <= 0:
        raise ValueError("noise power must be positive")
    rx = np.abs(h @ effective) ** 2 * amplitude[None, :] ** 2
    signal = np.diag(rx)
    interference = rx.sum(axis=1) - signal
    return signal / (interference + noise)


def sinr(u: int, h: np.ndarray, effective: np.ndarray, amplitude: np.ndarray, noise: float) -> float:
    return float(group_sinr(h, effective, amplitude, noise)[u])


def sum_se(sinrs) -> float:
    return float(sum(np.log2(1 + np.asarray(s)).sum() for s in sinrs))


def device_counts(arch: str, n_users: int, n_antennas: int, n_bands: int) -> DeviceCounts:
    if arch == "fpfa":
        rf = -(-n_users // n_bands)
        return DeviceCounts(rf * n_antennas, rf, n_bands)
    if arch in ("pfa", "fixed"):
        return DeviceCounts(n_users * n_antennas, n_users, 1)
    raise ConfigError(f"unknown architecture {arch!r}")


def power_consumption(arch: str, n_users: int, n_antennas: int, n_bands: int) -> float:
    return device_counts(arch, n_users, n_antennas, n_bands).power


def energy_efficiency(sum_se_value: float, total_power: float) -> float:
    if total_power <= 0:
        raise ValueError("power must be positive")
    return sum_se_value / total_power
