"""Hybrid precoding: constant-modulus analog block from the channel SVD, ZF digital stage."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ConfigError

RANK_TOL = 1e-10


class SingularGroupError(np.linalg.LinAlgError):
    """The effective channel of a group is rank deficient."""


@dataclass(frozen=True)
class BandPrecoder:
    """Precoders serving one group; columns of ``digital`` follow ``users``."""

    users: tuple[int, ...]
    analog: np.ndarray  # subarray_size x L_t
    digital: np.ndarray  # L_t x U_k
    power: np.ndarray  # sqrt(W) per user

    @property
    def effective(self) -> np.ndarray:
        return self.analog @ self.digital


def _fix_phase(v: np.ndarray) -> np.ndarray:
    """Rotate each column so its first non-negligible entry is real positive."""
    out = v.copy()
    for j in range(v.shape[1]):
        col = v[:, j]
        nz = np.flatnonzero(np.abs(col) > 1e-12 * max(np.abs(col).max(), 1e-300))
        if nz.size:
            out[:, j] *= np.exp(-1j * np.angle(col[nz[0]]))
    return out


def svd_precoder(h: np.ndarray, rf_chains: int) -> np.ndarray:
    """First ``rf_chains`` right singular vectors of ``h`` with the sign convention applied."""
    m = h.shape[1]
    if rf_chains > m:
        raise ConfigError(f"{rf_chains} RF chains exceed the {m}-element subarray")
    _, _, vh = np.linalg.svd(h, full_matrices=True)
    return _fix_phase(vh.conj().T[:, :rf_chains])


def analog_precoder(h: np.ndarray, rf_chains: int) -> np.ndarray:
    """Constant-modulus matrix nearest (Frobenius) to the SVD precoder."""
    if not np.any(h):
        raise ValueError("zero channel")
    f_opt = svd_precoder(h, rf_chains)
    return np.exp(1j * np.angle(f_opt)) / np.sqrt(h.shape[1])


def zero_forcing(g: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """Right pseudo-inverse of the effective channel ``g`` (U_k x L_t)."""
    u, l = g.shape
    if u > l:
        raise SingularGroupError(f"{u} users cannot be separated by {l} RF chains")
    s = np.linalg.svd(g, compute_uv=False)
    if s[0] == 0 or s[-1] <= tol * s[0]:
        raise SingularGroupError("effective channel is rank deficient")
    return g.conj().T @ np.linalg.inv(g @ g.conj().T)


def digital_precoder(g: np.ndarray, analog: np.ndarray) -> np.ndarray:
    """ZF digital precoder with columns scaled to unit radiated norm."""
    f_bb = zero_forcing(g)
    gain = np.linalg.norm(analog @ f_bb, axis=0)
    return f_bb / gain


def allocate_power(n_users: int, total_power: float) -> np.ndarray:
    """Equal split; amplitudes ``sqrt(P_t / U)``."""
    if total_power <= 0:
        raise ConfigError("total power must be positive")
    return np.full(n_users, np.sqrt(total_power / n_users))


def build_precoder(h: np.ndarray, users: tuple[int, ...], rf_chains: int, amplitude: np.ndarray) -> BandPrecoder:
    analog = analog_precoder(h, rf_chains)
    digital = digital_precoder(h @ analog, analog)
    return BandPrecoder(users, analog, digital, np.asarray(amplitude, dtype=float))
