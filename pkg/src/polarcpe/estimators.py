"""Estimator suite: greedy pursuit, conic refinement and subspace methods.

All estimators share one calling convention: measurements y, the operator
that produced them, a dictionary (plus arc bases where needed) and an
EstimatorConfig.  They return an EstimationResult whose f_hat is always
the synthesis of the returned (b_hat, a_hat) pairs from the continuous
model.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .conic import (
    ConicSolveError,
    SolverConfig,
    assemble_ccbp,
    extract_estimates,
    l1_synthesis,
    solve_ccbp,
)
from .dictionary import (
    ArcBasisSet,
    BandExclusionConfig,
    ParametricDictionary,
    atom_vector,
    band_exclusion,
)
from .interpolators import (
    InterpolationEstimate,
    UnstableFitError,
    ProxyVector,
    parabolic_interpolate,
    polar_interpolate,
)
from .sensing import MeasurementOperator
from .signals import PulseSpec, SamplingGrid, SparseSignalParams

__all__ = [
    "MusicConfig",
    "EstimatorConfig",
    "EstimationResult",
    "MetricRecord",
    "run_bomp",
    "run_ibomp",
    "run_ccbp",
    "run_tde_music",
    "match_and_score",
    "parabolic_handle",
    "polar_handle",
]


@dataclass(frozen=True)
class MusicConfig:
    """Subspace estimator knobs.

    subarray None picks floor(len/3) of the usable spectrum; refine is the
    peak-search grid refinement over one dictionary cell; band_rel_floor
    restricts the deconvolved spectrum to the widest contiguous run of
    bins above that fraction of the spectral peak, where division by the
    pulse spectrum is well conditioned; noise_scale is the known
    per-measurement noise rms used to budget the reconstruction fidelity.
    """

    subarray: int | None = None
    refine: int = 100
    band_rel_floor: float = 0.05
    noise_scale: float = 0.0


@dataclass(frozen=True)
class EstimatorConfig:
    algorithm: str = "bomp"
    K: int = 1
    eta: float = 0.0
    mu_floor: float = 1e-2
    xi: int = 0
    lam: float = 1.0
    sigma_sq: float = 0.0
    zeta: float = 0.0
    refine_with_ccbp: bool = False
    music: MusicConfig = field(default_factory=MusicConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self) -> None:
        if self.K < 1:
            raise ValueError("K must be at least 1")
        if self.xi < 0:
            raise ValueError("xi must be nonnegative")


@dataclass(frozen=True, eq=False)
class EstimationResult:
    """Estimates plus the reconstruction they imply."""

    b_hat: np.ndarray
    a_hat: np.ndarray
    f_hat: np.ndarray
    elapsed: float
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True)
class MetricRecord:
    """One benchmark table row; context columns are filled by the harness."""

    case: str = ""
    algorithm: str = ""
    kappa: float = float("nan")
    snr: float = float("nan")
    trial: int = -1
    b_mse_us2: float = float("nan")
    f_rel_err: float = float("nan")
    elapsed_s: float = float("nan")
    status: str = "ok"


def _wrap_param(b: float, dictionary: ParametricDictionary) -> float:
    if dictionary.kind == "tde":
        return float(np.mod(b, dictionary.grid.span))
    return float(b)


def _synthesize_from(
    dictionary: ParametricDictionary, b_hat: np.ndarray, a_hat: np.ndarray
) -> np.ndarray:
    f = np.zeros(dictionary.N, dtype=np.complex128)
    for b, a in zip(b_hat, a_hat):
        f = f + a * atom_vector(dictionary, float(b))
    return f


def _greedy_select(
    proxy_values: np.ndarray,
    excluded: np.ndarray,
) -> int | None:
    mags = np.abs(proxy_values)
    if excluded.size:
        mags = mags.copy()
        mags[excluded] = -1.0
    i_n = int(np.argmax(mags))
    if mags[i_n] < 0:
        return None
    return i_n


def run_bomp(
    y: np.ndarray,
    op: MeasurementOperator,
    dictionary: ParametricDictionary,
    cfg: EstimatorConfig,
) -> EstimationResult:
    """Greedy on-grid pursuit with coherence-band exclusion.

    Each round correlates the residual with every measured atom, excludes
    the coherence band of the atoms already chosen, picks the strongest
    admissible atom and refits all amplitudes by least squares.
    """
    start = time.perf_counter()
    AD = op.matrix @ dictionary.atoms
    becfg = BandExclusionConfig(eta=cfg.eta, mu_floor=cfg.mu_floor)
    S: list[int] = []
    y_res = np.asarray(y, dtype=np.complex128)
    amps = np.zeros(0, dtype=np.complex128)
    residuals = [float(np.linalg.norm(y_res))]
    selection: list[tuple[int, np.ndarray]] = []
    early_stop = False
    for _ in range(cfg.K):
        excluded = (
            band_exclusion(dictionary, S, becfg) if S else np.empty(0, dtype=int)
        )
        proxy = AD.conj().T @ y_res
        i_n = _greedy_select(proxy, excluded)
        if i_n is None:
            early_stop = True
            break
        selection.append((i_n, excluded))
        S.append(i_n)
        basis = AD[:, S]
        amps = np.linalg.lstsq(basis, y, rcond=None)[0]
        y_res = y - basis @ amps
        residuals.append(float(np.linalg.norm(y_res)))
    b_hat = dictionary.params[S].astype(float)
    f_hat = dictionary.atoms[:, S] @ amps if S else np.zeros(dictionary.N, complex)
    return EstimationResult(
        b_hat=b_hat,
        a_hat=amps,
        f_hat=f_hat,
        elapsed=time.perf_counter() - start,
        diagnostics={
            "selected": list(S),
            "residuals": residuals,
            "selection_trace": selection,
            "early_stop": early_stop,
        },
    )


def parabolic_handle(
    y_res: np.ndarray,
    op: MeasurementOperator,
    dictionary: ParametricDictionary,
    arcs: ArcBasisSet | None,
    proxy: ProxyVector,
    i_n: int,
) -> InterpolationEstimate:
    """Adapter giving the parabolic interpolator the greedy-loop protocol."""
    return parabolic_interpolate(
        proxy,
        i_n,
        dictionary.spacing,
        params=dictionary.params,
        circular=dictionary.kind == "tde",
    )


def polar_handle(
    y_res: np.ndarray,
    op: MeasurementOperator,
    dictionary: ParametricDictionary,
    arcs: ArcBasisSet,
    proxy: ProxyVector,
    i_n: int,
) -> InterpolationEstimate:
    """Adapter giving the polar interpolator the greedy-loop protocol."""
    return polar_interpolate(y_res, op, arcs, i_n)


def run_ibomp(
    y: np.ndarray,
    op: MeasurementOperator,
    dictionary: ParametricDictionary,
    arcs: ArcBasisSet,
    interp,
    cfg: EstimatorConfig,
) -> EstimationResult:
    """Greedy pursuit with per-round off-grid interpolation.

    interp(y_res, op, dictionary, arcs, proxy, i_n) refines the selected
    atom's parameter; the refined atom (not the grid atom) joins the
    least squares basis.  With cfg.refine_with_ccbp the greedy support,
    widened by xi grid neighbours per side, seeds one conic-program pass
    whose estimates replace the greedy ones; a failed or non-optimal
    solve keeps the greedy estimates and flags the downgrade.
    """
    start = time.perf_counter()
    AD = op.matrix @ dictionary.atoms
    becfg = BandExclusionConfig(eta=cfg.eta, mu_floor=cfg.mu_floor)
    S: list[int] = []
    b_list: list[float] = []
    measured_cols: list[np.ndarray] = []
    y = np.asarray(y, dtype=np.complex128)
    y_res = y
    amps = np.zeros(0, dtype=np.complex128)
    residuals = [float(np.linalg.norm(y_res))]
    selection: list[tuple[int, np.ndarray]] = []
    fallbacks = 0
    early_stop = False
    for _ in range(cfg.K):
        excluded = (
            band_exclusion(dictionary, S, becfg) if S else np.empty(0, dtype=int)
        )
        proxy_vec = AD.conj().T @ y_res
        i_n = _greedy_select(proxy_vec, excluded)
        if i_n is None:
            early_stop = True
            break
        selection.append((i_n, excluded))
        proxy = ProxyVector(values=proxy_vec)
        try:
            est = interp(y_res, op, dictionary, arcs, proxy, i_n)
            b_n = est.b_hat
        except UnstableFitError:
            b_n = float(dictionary.params[i_n])
            fallbacks += 1
        S.append(i_n)
        b_list.append(b_n)
        measured_cols.append(op.matrix @ atom_vector(dictionary, b_n))
        basis = np.stack(measured_cols, axis=1)
        amps = np.linalg.lstsq(basis, y, rcond=None)[0]
        y_res = y - basis @ amps
        residuals.append(float(np.linalg.norm(y_res)))
    b_hat = np.array([_wrap_param(b, dictionary) for b in b_list])
    a_hat = amps
    diagnostics: dict = {
        "selected": list(S),
        "residuals": residuals,
        "selection_trace": selection,
        "interp_fallbacks": fallbacks,
        "early_stop": early_stop,
    }
    if cfg.refine_with_ccbp and S:
        P = dictionary.P
        omega: set[int] = set()
        for s in S:
            for d in range(-cfg.xi, cfg.xi + 1):
                idx = s + d
                if dictionary.kind == "tde":
                    omega.add(idx % P)
                elif 0 <= idx < P:
                    omega.add(idx)
        problem = assemble_ccbp(
            arcs, sorted(omega), op, y, cfg.lam, cfg.sigma_sq, cfg.zeta
        )
        refined = False
        try:
            sol = solve_ccbp(problem, cfg.solver)
            diagnostics["ccbp_status"] = sol.status
            if sol.status == "optimal":
                ext_diag: dict = {}
                ests = extract_estimates(sol, problem, cfg.K, ext_diag)
                if len(ests) == cfg.K:
                    b_hat = np.array(
                        [_wrap_param(b, dictionary) for b, _ in ests]
                    )
                    a_hat = np.array([a for _, a in ests])
                    refined = True
                diagnostics["ccbp_extract"] = ext_diag
        except ConicSolveError as exc:
            diagnostics["ccbp_status"] = f"error: {exc}"
        diagnostics["ccbp_refined"] = refined
    f_hat = _synthesize_from(dictionary, b_hat, a_hat)
    return EstimationResult(
        b_hat=b_hat,
        a_hat=a_hat,
        f_hat=f_hat,
        elapsed=time.perf_counter() - start,
        diagnostics=diagnostics,
    )


def _fill_from_bomp(
    estimates: list[tuple[float, complex]],
    y: np.ndarray,
    op: MeasurementOperator,
    dictionary: ParametricDictionary,
    cfg: EstimatorConfig,
) -> list[tuple[float, complex]]:
    # Complete a short estimate list with grid-level greedy picks that do
    # not duplicate an existing estimate's cell.
    bomp = run_bomp(y, op, dictionary, cfg)
    span = dictionary.grid.span if dictionary.kind == "tde" else None
    half = dictionary.spacing / 2.0
    order = np.argsort(-np.abs(bomp.a_hat)) if bomp.a_hat.size else []
    filled = list(estimates)
    for j in order:
        if len(filled) >= cfg.K:
            break
        b = float(bomp.b_hat[j])
        clashes = False
        for b_have, _ in filled:
            d = b - b_have
            if span is not None:
                d = (d + span / 2.0) % span - span / 2.0
            if abs(d) < half:
                clashes = True
                break
        if not clashes:
            filled.append((b, complex(bomp.a_hat[j])))
    return filled


def run_ccbp(
    y: np.ndarray,
    op: MeasurementOperator,
    dictionary: ParametricDictionary,
    arcs: ArcBasisSet,
    cfg: EstimatorConfig,
) -> EstimationResult:
    """Continuous basis pursuit over the full parameter grid.

    When the solve fails, or the solution explains none of the signal
    (which is the correct optimum for very large lambda), the estimates
    fall back to grid-level greedy pursuit so the caller always gets K
    answers; the fallback is flagged in the diagnostics.
    """
    start = time.perf_counter()
    y = np.asarray(y, dtype=np.complex128)
    omega = np.arange(dictionary.P)
    problem = assemble_ccbp(
        arcs, omega, op, y, cfg.lam, cfg.sigma_sq, cfg.zeta
    )
    diagnostics: dict = {}
    estimates: list[tuple[float, complex]] = []
    try:
        sol = solve_ccbp(problem, cfg.solver)
        diagnostics["solver_status"] = sol.status
        diagnostics["violations"] = sol.diagnostics["violations"]
        explained = float(
            np.linalg.norm(problem.A.matrix @ (problem.E @ sol.x))
        )
        if explained > 1e-6 * max(float(np.linalg.norm(y)), 1e-300):
            ext_diag: dict = {}
            estimates = extract_estimates(sol, problem, cfg.K, ext_diag)
            diagnostics["extract"] = ext_diag
        else:
            diagnostics["extract"] = {"found": 0, "note": "solution carries no energy"}
    except ConicSolveError as exc:
        diagnostics["solver_status"] = f"error: {exc}"
    if len(estimates) < cfg.K:
        estimates = _fill_from_bomp(estimates, y, op, dictionary, cfg)
        diagnostics["bomp_fill"] = True
    b_hat = np.array([_wrap_param(b, dictionary) for b, _ in estimates])
    a_hat = np.array([a for _, a in estimates])
    f_hat = _synthesize_from(dictionary, b_hat, a_hat)
    return EstimationResult(
        b_hat=b_hat,
        a_hat=a_hat,
        f_hat=f_hat,
        elapsed=time.perf_counter() - start,
        diagnostics=diagnostics,
    )


def _largest_band(mask: np.ndarray) -> tuple[int, int]:
    # Widest contiguous True run, returned as a half-open index range.
    start = None
    best = (0, 0)
    for i, flag in enumerate(mask):
        if flag and start is None:
            start = i
        if (not flag or i == mask.size - 1) and start is not None:
            end = i + 1 if flag else i
            if end - start > best[1] - best[0]:
                best = (start, end)
            start = None
    return best


def run_tde_music(
    y: np.ndarray,
    op: MeasurementOperator,
    dictionary: ParametricDictionary,
    spec: PulseSpec,
    grid: SamplingGrid,
    cfg: EstimatorConfig,
) -> EstimationResult:
    """Delay estimation by spectral deconvolution plus subspace search.

    The signal is first reconstructed from the compressive measurements
    by l1 synthesis with fidelity budget sqrt(M) * noise_scale.  Dividing
    its spectrum by the pulse spectrum turns delays into cisoids; the
    deconvolved sequence (restricted to the well-conditioned band) feeds
    a forward-backward smoothed covariance, and the noise subspace yields
    a pseudospectrum scanned on a grid refined over each dictionary cell.
    """
    if dictionary.kind != "tde":
        raise ValueError("delay-domain subspace estimation needs a tde dictionary")
    start = time.perf_counter()
    y = np.asarray(y, dtype=np.complex128)
    eps = math.sqrt(op.M) * cfg.music.noise_scale
    coeffs = l1_synthesis(op, dictionary, y, eps)
    f_recon = dictionary.atoms @ coeffs
    G = np.fft.fft(dictionary.atoms[:, 0])
    if np.min(np.abs(G)) <= 1e-8:
        raise RuntimeError(
            "pulse spectrum has a near-zero bin; spectral division is invalid"
        )
    z_full = np.fft.fft(f_recon) / G
    mask = np.abs(G) >= cfg.music.band_rel_floor * np.max(np.abs(G))
    k0, k1 = _largest_band(mask)
    z = z_full[k0:k1]
    L = cfg.music.subarray or max(len(z) // 3, cfg.K + 1)
    L = int(min(max(L, cfg.K + 1), len(z) - 1))
    n_snap = len(z) - L + 1
    X = np.stack([z[i : i + L] for i in range(n_snap)], axis=1)
    R = (X @ X.conj().T) / n_snap
    exch = np.eye(L)[::-1]
    R = (R + exch @ R.conj() @ exch) / 2.0
    eigvals, eigvecs = np.linalg.eigh(R)
    noise_sub = eigvecs[:, : L - cfg.K]
    refine = cfg.music.refine
    n_grid = dictionary.P * refine
    b_grid = np.arange(n_grid) * (dictionary.spacing / refine)
    ell = np.arange(L)
    steering = np.exp(-2j * np.pi * np.outer(ell, b_grid) / grid.span)
    denom = np.sum(np.abs(noise_sub.conj().T @ steering) ** 2, axis=0)
    pseudo = 1.0 / np.maximum(denom, 1e-300)
    b_hat = _pick_peaks(pseudo, b_grid, cfg.K, dictionary.spacing, grid.span)
    measured = np.stack(
        [op.matrix @ atom_vector(dictionary, b) for b in b_hat], axis=1
    )
    a_hat = np.linalg.lstsq(measured, y, rcond=None)[0]
    f_hat = _synthesize_from(dictionary, b_hat, a_hat)
    return EstimationResult(
        b_hat=b_hat,
        a_hat=a_hat,
        f_hat=f_hat,
        elapsed=time.perf_counter() - start,
        diagnostics={"band": (k0, k1), "subarray": L, "epsilon": eps},
    )


def _pick_peaks(
    pseudo: np.ndarray,
    b_grid: np.ndarray,
    K: int,
    cell: float,
    span: float,
) -> np.ndarray:
    """Top-K circular local maxima separated by at least one cell."""
    n = pseudo.size
    is_peak = (pseudo >= np.roll(pseudo, 1)) & (pseudo > np.roll(pseudo, -1))
    candidates = np.nonzero(is_peak)[0]
    candidates = candidates[np.argsort(-pseudo[candidates])]
    chosen: list[int] = []
    for idx in candidates:
        if len(chosen) == K:
            break
        ok = True
        for prev in chosen:
            d = abs(b_grid[idx] - b_grid[prev])
            d = min(d, span - d)
            if d < cell:
                ok = False
                break
        if ok:
            chosen.append(int(idx))
    peaks = []
    logp = np.log(pseudo)
    step = b_grid[1] - b_grid[0]
    for idx in chosen:
        lo, hi = (idx - 1) % n, (idx + 1) % n
        denom = logp[lo] - 2.0 * logp[idx] + logp[hi]
        off = 0.0
        if abs(denom) > 0:
            off = float(np.clip(0.5 * (logp[lo] - logp[hi]) / denom, -0.5, 0.5))
        peaks.append(float(np.mod(b_grid[idx] + off * step, span)))
    return np.asarray(peaks)


def match_and_score(
    truth: SparseSignalParams,
    result: EstimationResult,
    delta: float,
    span: float | None = None,
    f_true: np.ndarray | None = None,
) -> MetricRecord:
    """Assignment-based scoring of delay estimates against the truth.

    Estimates are matched one-to-one to true components by minimum total
    absolute delay error (circular when span is given).  b-MSE averages
    the squared matched errors in microseconds squared; unmatched truths
    are charged half a grid cell each.  f_rel_err compares result.f_hat
    to f_true when supplied.
    """
    b_true = truth.delays
    b_est = result.b_hat
    K_t = b_true.size
    if b_est.size:
        diff = b_true[:, None] - b_est[None, :]
        if span is not None:
            diff = (diff + span / 2.0) % span - span / 2.0
        cost = np.abs(diff)
        rows, cols = linear_sum_assignment(cost)
        matched_errs = cost[rows, cols]
    else:
        matched_errs = np.empty(0)
    n_miss = K_t - matched_errs.size
    penalty = (delta / 2.0) ** 2
    mse_s2 = (float(np.sum(matched_errs**2)) + n_miss * penalty) / K_t
    b_mse_us2 = mse_s2 * 1e12
    f_rel_err = float("nan")
    if f_true is not None:
        num = float(np.linalg.norm(f_true - result.f_hat) ** 2)
        den = float(np.linalg.norm(f_true) ** 2)
        f_rel_err = num / den if den > 0 else float("nan")
    return MetricRecord(
        b_mse_us2=b_mse_us2,
        f_rel_err=f_rel_err,
        elapsed_s=result.elapsed,
        status="ok",
    )
