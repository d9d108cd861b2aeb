"""Randomised invariant suite, run by ``fpfa validate`` and the test suite."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .channel import ArraySpec, BandSpec, UserPaths, make_bands, pseudo_channel, rx_port_phase_vector, tx_steering_vector
from .config import ScenarioConfig
from .freq_alloc import correlation, correlation_matrix, frequency_invariance_check, group_users
from .port_select import orthonormal_rows, projection_norm, projection_norms
from .precoder import analog_precoder, digital_precoder

ZF_REL_RESIDUAL = 1e-6  # -60 dB
COLUMN_TOL = 1e-9


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def random_user(rng: np.random.Generator, n_paths: int = 2, user: int = 0) -> UserPaths:
    d = np.sort(rng.uniform(5, 40, n_paths))
    scale = np.ones(n_paths, dtype=complex)
    scale[1:] = rng.uniform(0.1, 0.9, n_paths - 1) * np.exp(2j * np.pi * rng.random(n_paths - 1))
    return UserPaths(
        user=user,
        distance=d,
        azimuth=rng.uniform(0, np.pi, n_paths),
        polar=rng.uniform(0, np.pi, n_paths),
        rx_angle=rng.uniform(-np.pi / 2, np.pi / 2, n_paths),
        scale=scale,
    )


def _complex(rng: np.random.Generator, *shape: int) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def check_unit_modulus(rng, trials=200) -> CheckResult:
    band = BandSpec(0, 300e9, 30e9)
    worst = 0.0
    for _ in range(trials):
        a_t = tx_steering_vector(band, rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi), (8, 4))
        a_r = rx_port_phase_vector(band, rng.uniform(-np.pi, np.pi), 50, band.wavelength * 15 / 49)
        worst = max(worst, np.abs(np.abs(a_t) - 1).max(), np.abs(np.abs(a_r) - 1).max())
    return CheckResult("unit-modulus steering", worst < 1e-12, f"max | |a|-1 | = {worst:.2e}")


def check_rank_bound(rng, trials=50) -> CheckResult:
    band = BandSpec(0, 300e9, 30e9)
    array = ArraySpec(32, 1, 1, 40, 15.0)
    ok = True
    for _ in range(trials):
        p = int(rng.integers(1, 3))
        s = np.linalg.svd(pseudo_channel(random_user(rng, p), band, array).matrix, compute_uv=False)
        ok &= bool(np.all(s[p:] < 1e-10 * s[0]))
    return CheckResult("rank <= number of paths", ok, f"{trials} random channels")


def check_port_reference(rng, trials=50) -> CheckResult:
    band = BandSpec(0, 330e9, 33e9)
    worst = 0.0
    for _ in range(trials):
        user = random_user(rng)
        a = pseudo_channel(user, band, ArraySpec(16, 1, 1, 500, 15.0)).matrix[0]
        b = pseudo_channel(user, band, ArraySpec(16, 1, 1, 7, 3.0)).matrix[0]
        worst = max(worst, np.abs(a - b).max() / np.abs(a).max())
    return CheckResult("port-1 channel independent of port geometry", worst < 1e-12, f"max rel diff {worst:.2e}")


def check_correlation(rng, trials=500) -> CheckResult:
    lo, hi, scale_err = 1.0, 0.0, 0.0
    for _ in range(trials):
        m = int(rng.integers(2, 17))
        h1, h2 = _complex(rng, m), _complex(rng, m)
        r = correlation(h1, h2)
        lo, hi = min(lo, r), max(hi, r)
        c1, c2 = _complex(rng, 1)[0], _complex(rng, 1)[0]
        scale_err = max(scale_err, abs(correlation(c1 * h1, c2 * h2) - r))
    ok = lo >= -1e-12 and hi <= 1 + 1e-12 and scale_err < 1e-12
    return CheckResult("correlation range and scale invariance", ok, f"range [{lo:.3g}, {hi:.3g}], scale err {scale_err:.1e}")


def check_frequency_invariance(rng, trials=1000) -> CheckResult:
    bands = make_bands(ScenarioConfig())
    worst = 0.0
    for _ in range(trials):
        a, b = random_user(rng, 1, 0), random_user(rng, 1, 1)
        worst = max(worst, frequency_invariance_check(a, b, bands, 128))
    return CheckResult("LoS correlation frequency invariance", worst < 1e-9, f"max deviation {worst:.2e} over {trials} pairs")


def check_partition(rng, trials=100) -> CheckResult:
    ok = True
    for _ in range(trials):
        k = int(rng.integers(1, 5))
        cap = int(rng.integers(1, 6))
        u = int(rng.integers(1, k * cap + 1))
        corr = correlation_matrix(_complex(rng, u, 8))
        groups = group_users(corr, k, cap).groups
        flat = sorted(x for g in groups for x in g)
        ok &= flat == list(range(u)) and len(groups) == k and max(map(len, groups)) <= cap
    return CheckResult("grouping is a capped partition", ok, f"{trials} random instances")


def check_precoder(rng, trials=200) -> list[CheckResult]:
    cm_err = col_err = zf_worst = 0.0
    skipped = 0
    for _ in range(trials):
        m = int(rng.choice([8, 16, 32]))
        u = int(rng.integers(1, min(m, 8) + 1))
        l = int(rng.integers(u, m + 1))
        h = _complex(rng, u, m)
        f = analog_precoder(h, l)
        cm_err = max(cm_err, np.abs(np.abs(f) - 1 / np.sqrt(m)).max())
        g = h @ f
        if np.linalg.cond(g) >= 1e6:
            skipped += 1
            continue
        f_bb = digital_precoder(g, f)
        col_err = max(col_err, np.abs(np.linalg.norm(f @ f_bb, axis=0) - 1).max())
        rx = np.abs(h @ f @ f_bb) ** 2
        sig = np.diag(rx)
        off = rx - np.diag(sig)
        zf_worst = max(zf_worst, (off / sig[:, None]).max())
    return [
        CheckResult("analog constant modulus", cm_err < 1e-12, f"max entry error {cm_err:.1e}"),
        CheckResult("unit per-user column power", col_err < COLUMN_TOL, f"max |norm-1| {col_err:.1e}"),
        CheckResult(
            "ZF residual below -60 dB",
            zf_worst < ZF_REL_RESIDUAL,
            f"worst leakage {10 * np.log10(max(zf_worst, 1e-300)):.1f} dB ({skipped} ill-conditioned skipped)",
        ),
    ]


def check_projection(rng, trials=200) -> CheckResult:
    ok = True
    for _ in range(trials):
        m = int(rng.integers(2, 17))
        r = int(rng.integers(1, m))
        basis = _complex(rng, r, m)
        h = _complex(rng, m)
        p = projection_norm(h, basis)
        ok &= p <= np.linalg.norm(h) + 1e-12
        inside = _complex(rng, r) @ basis
        ok &= abs(projection_norm(inside, basis) - np.linalg.norm(inside)) < 1e-9 * np.linalg.norm(inside)
        mix = _complex(rng, r, r) @ basis
        ok &= abs(projection_norm(h, mix) - p) < 1e-9 * np.linalg.norm(h)
        q = orthonormal_rows(basis)
        ok &= np.allclose(projection_norms(h[None, :], q), p)
    return CheckResult("projector bounds and basis invariance", bool(ok), f"{trials} random instances")


CHECKS: list[Callable] = [
    check_unit_modulus,
    check_rank_bound,
    check_port_reference,
    check_correlation,
    check_frequency_invariance,
    check_partition,
    check_precoder,
    check_projection,
]


def run_invariants(seed: int = 0) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    results: list[CheckResult] = []
    for check in CHECKS:
        out = check(rng)
        results.extend(out if isinstance(out, list) else [out])
    return results
