"""Approximation-error analysis and the sparsity-weight sensitivity sweep.

The zeta analyzer quantifies how far the trigonometric arc strays from
the true atom manifold between two grid points, and compares it against
the worst-case error of purely grid-based matching (an atom exactly in
between two grid points).  The lambda sweep measures how the continuous
basis pursuit estimator trades off against its group-sparsity weight,
with grid-level greedy pursuit as the reference on identical data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dictionary import arc_frame_at, atom_vector, build_arc_bases, build_dictionary
from .estimators import EstimatorConfig, match_and_score, run_bomp, run_ccbp
from .sensing import build_operator, measure
from .signals import (
    NoiseSpec,
    PulseSpec,
    SamplingGrid,
    SparseSignalParams,
)

__all__ = ["ZetaReport", "SweepCell", "compute_zeta", "lambda_sweep"]


@dataclass(frozen=True)
class ZetaReport:
    """Worst-case arc deviation for one dictionary redundancy."""

    c: int
    zeta: float
    b_worst: float
    bomp_max_error: float
    samples: int


def compute_zeta(
    kind: str,
    grid: SamplingGrid,
    c: int,
    n_samples: int = 100,
    spec: PulseSpec | None = None,
) -> ZetaReport:
    """Sample the arc deviation around a centre atom.

    Offsets are sampled uniformly across one grid cell; the worst
    parameter is the one where the angle read back from the true atom
    (acos of its real correlation with the centre, normalized by the arc
    half-angle) deviates most from the nominal linear mapping of the
    offset.  zeta is the l2 distance between the true atom and its arc
    point there.  The centre sits mid-grid so edge effects cannot bias
    the non-circulant (frequency) family.
    """
    if n_samples < 2:
        raise ValueError("need at least two samples")
    if kind == "tde" and spec is None:
        spec = PulseSpec()
    dictionary = build_dictionary(kind, spec, grid, c)
    p = dictionary.P // 2
    b_p = float(dictionary.params[p])
    delta = dictionary.spacing
    half = delta / 2.0
    c_vec, u_vec, v_vec, theta = arc_frame_at(dictionary, b_p, half)
    r = float(np.linalg.norm(dictionary.atoms[:, p]))
    g_p = dictionary.atoms[:, p]
    offsets = np.linspace(-half, half, n_samples)
    deviations = np.empty(n_samples)
    for i, dn in enumerate(offsets):
        g_true = atom_vector(dictionary, b_p + dn)
        ip = np.real(np.vdot(g_p, g_true)) / (r * r)
        angle = np.arccos(np.clip(ip, -1.0, 1.0))
        deviations[i] = abs(angle / theta - abs(dn) / half)
    worst = int(np.argmax(deviations))
    dn_worst = float(offsets[worst])
    phi = 2.0 * dn_worst * theta / delta
    arc_point = c_vec + r * np.cos(phi) * u_vec + r * np.sin(phi) * v_vec
    g_true = atom_vector(dictionary, b_p + dn_worst)
    zeta = float(np.linalg.norm(g_true - arc_point))
    g_mid = atom_vector(dictionary, b_p + half)
    bomp_max = float(np.linalg.norm(g_mid - g_p))
    return ZetaReport(
        c=int(c),
        zeta=zeta,
        b_worst=b_p + dn_worst,
        bomp_max_error=bomp_max,
        samples=n_samples,
    )


@dataclass(frozen=True)
class SweepCell:
    """Mean delay MSE of one (lambda, kappa, snr) sweep cell."""

    lam: float
    kappa: float
    snr: float
    b_mse_us2: float
    bomp_b_mse_us2: float
    trials: int
    failures: int


def lambda_sweep(
    lambda_grid: "list[float]",
    kappa_grid: "list[float]",
    snr_grid: "list[float]",
    trials: int,
    spec: PulseSpec | None = None,
    grid: SamplingGrid | None = None,
    c: int = 5,
    seed: int = 0,
) -> list[SweepCell]:
    """Single-pulse recovery error of the conic estimator across lambda.

    Every cell reruns the same per-trial data (delay, amplitude with real
    and imaginary parts uniform on [1, 10], operator, noise) for each
    lambda and for the greedy reference, so rows are directly comparable.
    Solver failures are counted per cell rather than raised.
    """
    if trials < 0:
        raise ValueError("trials must be nonnegative")
    if trials == 0 or not lambda_grid:
        return []
    spec = spec or PulseSpec()
    grid = grid or SamplingGrid(N=100, Ts=2e-8)
    dictionary = build_dictionary("tde", spec, grid, c)
    arcs = build_arc_bases(dictionary)
    zeta = compute_zeta("tde", grid, c, spec=spec).zeta
    span = grid.span
    delta = dictionary.spacing
    cells: list[SweepCell] = []
    for ki, kappa in enumerate(kappa_grid):
        for si, snr in enumerate(snr_grid):
            sq_err = {float(lam): [] for lam in lambda_grid}
            bomp_sq = []
            failures = {float(lam): 0 for lam in lambda_grid}
            for trial in range(trials):
                rng = np.random.default_rng((seed, ki, si, trial))
                b = float(rng.uniform(0.0, span))
                a = complex(rng.uniform(1, 10), rng.uniform(1, 10))
                truth = SparseSignalParams(
                    amplitudes=np.array([a]), delays=np.array([b])
                )
                f = a * atom_vector(dictionary, b)
                op = build_operator(
                    grid.N, kappa, seed=int(rng.integers(0, 2**31))
                )
                noise_seed = int(rng.integers(0, 2**31))
                if np.isinf(snr):
                    noise = NoiseSpec(kind="none")
                else:
                    noise = NoiseSpec(kind="measurement", snr=snr, seed=noise_seed)
                y = measure(op, f, noise)
                y_clean = op.matrix @ f
                sigma_sq = (
                    0.0
                    if np.isinf(snr)
                    else float(np.linalg.norm(y_clean) ** 2 / snr)
                )
                bomp_cfg = EstimatorConfig(algorithm="bomp", K=1)
                bomp_res = run_bomp(y, op, dictionary, bomp_cfg)
                bomp_sq.append(
                    match_and_score(
                        truth, bomp_res, delta=delta, span=span
                    ).b_mse_us2
                )
                for lam in lambda_grid:
                    cfg = EstimatorConfig(
                        algorithm="ccbp",
                        K=1,
                        lam=float(lam),
                        sigma_sq=sigma_sq,
                        zeta=zeta,
                    )
                    res = run_ccbp(y, op, dictionary, arcs, cfg)
                    status = res.diagnostics.get("solver_status", "")
                    if status != "optimal":
                        failures[float(lam)] += 1
                    sq_err[float(lam)].append(
                        match_and_score(
                            truth, res, delta=delta, span=span
                        ).b_mse_us2
                    )
            bomp_mean = float(np.mean(bomp_sq))
            for lam in lambda_grid:
                cells.append(
                    SweepCell(
                        lam=float(lam),
                        kappa=float(kappa),
                        snr=float(snr),
                        b_mse_us2=float(np.mean(sq_err[float(lam)])),
                        bomp_b_mse_us2=bomp_mean,
                        trials=trials,
                        failures=failures[float(lam)],
                    )
                )
    return cells
