"""Correlation-based user grouping across frequency bands."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .channel import ArraySpec, BandSpec, UserPaths, channel_row, pseudo_channel
from .config import ConfigError


class DegenerateChannelError(ValueError):
    pass


@dataclass(frozen=True)
class GroupAssignment:
    groups: tuple[tuple[int, ...], ...]

    @property
    def band_of(self) -> dict[int, int]:
        return {u: k for k, members in enumerate(self.groups) for u in members}

    def sizes(self) -> list[int]:
        return [len(g) for g in self.groups]


def correlation(h_i: np.ndarray, h_j: np.ndarray) -> float:
    """Modulus of the normalised inner product of two channel rows."""
    if h_i.shape != h_j.shape:
        raise ValueError("channel rows differ in length")
    n_i, n_j = np.linalg.norm(h_i), np.linalg.norm(h_j)
    if n_i == 0 or n_j == 0:
        raise DegenerateChannelError("zero-norm channel")
    return float(min(abs(np.vdot(h_j, h_i)) / (n_i * n_j), 1.0))


def correlation_matrix(rows: np.ndarray) -> np.ndarray:
    """Pairwise correlations of the rows of ``rows`` with a zero diagonal."""
    norms = np.linalg.norm(rows, axis=1)
    if np.any(norms == 0):
        raise DegenerateChannelError("zero-norm channel")
    unit = rows / norms[:, None]
    rho = np.minimum(np.abs(unit @ unit.conj().T), 1.0)
    np.fill_diagonal(rho, 0.0)
    return rho


def frequency_invariance_check(
    user_m: UserPaths, user_n: UserPaths, bands: list[BandSpec], n_antennas: int
) -> float:
    """Largest spread of the LoS correlation of two users across bands.

    Each band is evaluated on its own half-wavelength subarray of
    ``n_antennas / len(bands)`` elements, at port 1.
    """
    if user_m.n_paths != 1 or user_n.n_paths != 1:
        raise ValueError("the invariance argument only covers LoS-only channels")
    array = ArraySpec(n_antennas, len(bands), 1, 1, 0.0)
    values = [
        correlation(
            channel_row(pseudo_channel(user_m, band, array), 1),
            channel_row(pseudo_channel(user_n, band, array), 1),
        )
        for band in bands
    ]
    return float(max(values) - min(values))


def sum_intragroup_correlation(assignment: GroupAssignment, corr: np.ndarray) -> float:
    """Sum of correlations over unordered co-grouped pairs."""
    total = 0.0
    for members in assignment.groups:
        idx = np.asarray(members, dtype=int)
        total += corr[np.ix_(idx, idx)].sum() / 2
    return float(total)


def group_users(
    corr: np.ndarray, n_groups: int, max_group_size: int, trace: list | None = None
) -> GroupAssignment:
    """Greedy descending-correlation grouping with a per-group size cap.

    All users start in group 0. Pairs are visited once in descending
    correlation; when both members share a group, the one contributing more
    to that group's correlation sum is pulled out and placed in whichever
    group (its own included) gains the least correlation. Groups left above
    ``max_group_size`` are then relieved one user at a time, always taking
    the move that raises the objective least.

    ``trace``, if given, receives ``(user, from_group, to_group, costs)`` for
    every move, ``costs`` being the correlation the user would add to each
    group (``inf`` where the group is not a candidate).
    """
    u = corr.shape[0]
    if n_groups < 1 or max_group_size < 1:
        raise ConfigError("need at least one group of size >= 1")
    if u > n_groups * max_group_size:
        raise ConfigError(f"{u} users do not fit in {n_groups} groups of {max_group_size}")

    rho = np.array(corr, dtype=float)
    np.fill_diagonal(rho, 0.0)
    label = np.zeros(u, dtype=int)
    # load[k, v]: summed correlation of user v to the members of group k
    load = np.zeros((n_groups, u))
    load[0] = rho.sum(axis=0)

    def move(v: int, src: int, dst: int, costs: np.ndarray) -> None:
        if trace is not None:
            trace.append((v, src, dst, costs))
        label[v] = dst
        load[dst] += rho[v]

    pairs = list(combinations(range(u), 2))
    pairs.sort(key=lambda p: (-rho[p], p))  # lowest index first on ties
    for i, j in pairs:
        g = label[i]
        if label[j] != g:
            continue
        out = i if load[g, i] > load[g, j] else j  # larger index on ties
        load[g] -= rho[out]
        costs = load[:, out].copy()
        move(out, int(g), int(np.argmin(costs)), costs)

    sizes = np.bincount(label, minlength=n_groups)
    while sizes.max() > max_group_size:
        g = int(np.argmax(sizes > max_group_size))
        room = sizes < max_group_size
        members = np.flatnonzero(label == g)
        delta = np.where(room[:, None], load[:, members], np.inf) - load[g, members]
        k, m = np.unravel_index(np.argmin(delta), delta.shape)
        v = int(members[m])
        load[g] -= rho[v]
        move(v, g, int(k), np.where(room, load[:, v], np.inf))
        sizes[g] -= 1
        sizes[k] += 1

    groups = tuple(tuple(int(x) for x in np.flatnonzero(label == k)) for k in range(n_groups))
    return GroupAssignment(groups)
