"""Sequential minimum-projection port selection within one frequency group."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel import PortChannelTensor

RANK_TOL = 1e-10


@dataclass(frozen=True)
class PortSelection:
    users: tuple[int, ...]  # group order as given
    ports: tuple[int, ...]  # 1-based, aligned with ``users``
    channels: np.ndarray  # row u is the channel of users[u] at its port


def orthonormal_rows(basis: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal rows spanning the row space of ``basis`` (rank-truncated)."""
    if basis.shape[0] == 0:
        return basis
    _, s, vh = np.linalg.svd(basis, full_matrices=False)
    rank = int(np.sum(s > tol * s[0])) if s[0] > 0 else 0
    return vh[:rank]


def projection_norms(candidates: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Norms of the projections of each candidate row onto the rows of ``q``."""
    if q.shape[0] == 0:
        return np.zeros(candidates.shape[0])
    return np.linalg.norm(candidates @ q.conj().T, axis=1)


def projection_norm(h: np.ndarray, basis: np.ndarray) -> float:
    basis = np.atleast_2d(basis)
    if basis.size and basis.shape[1] != h.shape[-1]:
        raise ValueError("candidate and basis lengths differ")
    return float(projection_norms(h[None, :], orthonormal_rows(basis))[0])


def processing_order(tensors: Sequence[PortChannelTensor], order: str = "norm") -> list[int]:
    """Positions into ``tensors``: strongest port-1 channel first, or as given."""
    if order == "index":
        return list(range(len(tensors)))
    norms = [np.linalg.norm(t.matrix[0]) for t in tensors]
    return sorted(range(len(tensors)), key=lambda i: (-norms[i], i))


def port_scores(candidates: np.ndarray, q: np.ndarray, metric: str = "residual") -> np.ndarray:
    """Score every candidate row against the basis ``q``; lower is better."""
    proj = projection_norms(candidates, q)
    if metric == "projection":
        return proj
    norms = np.linalg.norm(candidates, axis=1)
    if metric == "normalized":
        return np.divide(proj, norms, out=np.ones_like(proj), where=norms > 0)
    if metric == "residual":
        return -np.sqrt(np.maximum(norms**2 - proj**2, 0.0))
    raise ValueError(f"unknown port metric {metric!r}")


def select_ports(
    tensors: Sequence[PortChannelTensor], order: str = "norm", metric: str = "residual"
) -> PortSelection:
    """Pick each user's port in turn to minimise its projection onto the users already placed.

    The first user in processing order keeps port 1; there is no second pass.
    """
    if not tensors:
        raise ValueError("empty group")
    width = tensors[0].matrix.shape[1]
    if any(t.matrix.shape[1] != width or t.band != tensors[0].band for t in tensors):
        raise ValueError("tensors must share band and subarray width")

    seq = processing_order(tensors, order)
    ports = [0] * len(tensors)
    rows = np.empty((len(tensors), width), dtype=complex)
    chosen: list[np.ndarray] = []
    for step, pos in enumerate(seq):
        mat = tensors[pos].matrix
        if step == 0:
            best = 0
        else:
            q = orthonormal_rows(np.array(chosen))
            best = int(np.argmin(port_scores(mat, q, metric)))
        ports[pos] = best + 1
        rows[pos] = mat[best]
        chosen.append(mat[best])
    return PortSelection(
        users=tuple(t.user for t in tensors), ports=tuple(ports), channels=rows
    )


def fixed_ports(tensors: Sequence[PortChannelTensor]) -> PortSelection:
    """Every user pinned to port 1 (fixed-antenna baseline)."""
    rows = np.array([t.matrix[0] for t in tensors])
    return PortSelection(tuple(t.user for t in tensors), (1,) * len(tensors), rows)
