"""Monte Carlo benchmark harness.

Three experiment cases are provided: well-separated pulses with band
exclusion (A), overlapping pulses with band exclusion disabled (B), and
overlapping pulses under signal noise, which folds through the
measurement operator (C).  Every trial draws its own delays, amplitudes,
operator and noise from a stream derived from (seed, trial), so records
are reproducible and independent of execution order; all algorithms in a
cell see identical data.
"""

from __future__ import annotations

import csv
import functools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .analysis import compute_zeta
from .dictionary import build_arc_bases, build_dictionary
from .estimators import (
    EstimatorConfig,
    EstimationResult,
    MetricRecord,
    MusicConfig,
    match_and_score,
    parabolic_handle,
    polar_handle,
    run_bomp,
    run_ccbp,
    run_ibomp,
    run_tde_music,
)
from .sensing import build_operator, measure
from .signals import NoiseSpec, PulseSpec, SamplingGrid, SparseSignalParams, synthesize

__all__ = [
    "ExperimentConfig",
    "MetricRecord",
    "CSV_HEADER",
    "default_config",
    "parse_config_file",
    "write_default_config",
    "draw_delays",
    "run_case",
    "emit_csv",
    "parse_csv",
]

ALGORITHMS = ("bomp", "paibomp", "poibomp", "ccbp", "paibomp_ccbp", "tde_music")

CSV_HEADER = "case,algorithm,kappa,snr,trial,b_mse_us2,f_rel_err,elapsed_s,status"


@dataclass(frozen=True)
class ExperimentConfig:
    """Complete description of one benchmark run.

    Grids are tuples so configs stay hashable; snr entries may be inf for
    noiseless cells.  Case defaults: A uses min_separation 1e-6 s with
    band exclusion on (eta 0), B and C use 5 Ts with exclusion disabled
    (eta 1); C injects signal noise, A and B measurement noise.
    """

    case: str = "A"
    algorithms: tuple = ("bomp", "poibomp")
    kappa_grid: tuple = (0.1, 0.2, 0.3, 0.4, 0.5)
    snr_grid: tuple = (10.0, 100.0, 1000.0, 10000.0)
    trials: int = 25
    K: int = 3
    min_separation: float = 1e-6
    seed: int = 0
    N: int = 500
    Ts: float = 2e-8
    f0: float = 1e6
    delta_f: float = 40e6
    T: float = 1e-6
    c: int = 1
    eta: float = 0.0
    xi: int = 0
    lam: float = 1.0
    output: str = "results.csv"
    jobs: int = 1

    def __post_init__(self) -> None:
        if self.case not in ("A", "B", "C"):
            raise ValueError("case must be A, B or C")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.min_separation < 0:
            raise ValueError("min_separation must be nonnegative")
        if not self.algorithms:
            raise ValueError("need at least one algorithm")
        unknown = [a for a in self.algorithms if a not in ALGORITHMS]
        if unknown:
            raise ValueError(f"unknown algorithms {unknown}; valid: {ALGORITHMS}")
        if self.K < 1:
            raise ValueError("K must be at least 1")
        for kappa in self.kappa_grid:
            if not 0.0 < kappa <= 1.0:
                raise ValueError("kappa values must lie in (0, 1]")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("eta must lie in [0, 1]")

    @property
    def noise_kind(self) -> str:
        return "signal" if self.case == "C" else "measurement"


def default_config(case: str = "A") -> ExperimentConfig:
    """Desk-scale defaults for each experiment case."""
    Ts = 2e-8
    if case == "A":
        return ExperimentConfig(case="A", min_separation=1e-6, eta=0.0)
    if case == "B":
        return ExperimentConfig(
            case="B",
            min_separation=5 * Ts,
            eta=1.0,
            algorithms=("bomp", "paibomp", "poibomp"),
        )
    if case == "C":
        return ExperimentConfig(
            case="C",
            min_separation=5 * Ts,
            eta=1.0,
            kappa_grid=(0.4, 1.0),
            algorithms=("bomp", "poibomp"),
        )
    raise ValueError("case must be A, B or C")


_CONFIG_FIELDS = {
    "case": str,
    "algorithms": "str_list",
    "kappa_grid": "float_list",
    "snr_grid": "float_list",
    "trials": int,
    "K": int,
    "min_separation": float,
    "seed": int,
    "N": int,
    "Ts": float,
    "f0": float,
    "delta_f": float,
    "T": float,
    "c": int,
    "eta": float,
    "xi": int,
    "lam": float,
    "output": str,
    "jobs": int,
}


def _parse_value(key: str, raw: str):
    kind = _CONFIG_FIELDS[key]
    raw = raw.strip()
    if kind == "str_list":
        return tuple(part.strip() for part in raw.split(",") if part.strip())
    if kind == "float_list":
        return tuple(float(part) for part in raw.split(",") if part.strip())
    if kind is int:
        return int(raw)
    if kind is float:
        return float(raw)
    return raw


def parse_config_file(path: str, overrides: "dict[str, str] | None" = None) -> ExperimentConfig:
    """Read a key = value config file.

    Lines starting with # are comments.  The case is read first and fills
    in that case's defaults; every other key then overrides them, as do
    any extra key=value overrides given directly.
    """
    entries: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, _, raw = stripped.partition("=")
            key = key.strip()
            if key not in _CONFIG_FIELDS:
                raise ValueError(
                    f"{path}:{lineno}: unknown key {key!r}; valid keys: "
                    + ", ".join(sorted(_CONFIG_FIELDS))
                )
            entries[key] = raw
    if overrides:
        for key, raw in overrides.items():
            if key not in _CONFIG_FIELDS:
                raise ValueError(
                    f"override: unknown key {key!r}; valid keys: "
                    + ", ".join(sorted(_CONFIG_FIELDS))
                )
            entries[key] = raw
    case = entries.pop("case", "A").strip()
    config = default_config(case)
    parsed = {key: _parse_value(key, raw) for key, raw in entries.items()}
    return replace(config, **parsed)


_DEFAULT_CONFIG_TEXT = """\
# Benchmark configuration.  Keys are 'key = value'; lists are comma separated.
# Values below reproduce the reference chirp setup: 50 MHz sampling,
# 1 us pulses sweeping 1 MHz to 41 MHz, three pulses per signal.

case = A
algorithms = bomp, paibomp, poibomp
# Conic-program estimators (ccbp, paibomp_ccbp) and tde_music work too but
# are much slower at N = 500; see README for a reduced-size example.

N = 500
Ts = 2e-8
f0 = 1e6
delta_f = 40e6
T = 1e-6
c = 1
K = 3

kappa_grid = 0.1, 0.2, 0.3, 0.4, 0.5
snr_grid = 10, 100, 1000, 10000
trials = 25
seed = 0

# Case A separates pulses by at least 1e-6 s and uses band exclusion
# (eta = 0); cases B and C default to 5 Ts separation with exclusion
# disabled (eta = 1).  min_separation and eta may be overridden here.

xi = 0
lam = 1.0
jobs = 1
output = results.csv
"""


def write_default_config(path: str) -> None:
    """Write the commented default configuration file."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_DEFAULT_CONFIG_TEXT)


def draw_delays(
    rng: np.random.Generator, K: int, span: float, min_separation: float
) -> np.ndarray:
    """K delays uniform on the circular interval, pairwise separated.

    Rejection sampling: redraw until all pairwise circular distances meet
    min_separation.
    """
    if K * min_separation >= span:
        raise ValueError("separation constraint cannot be met on this interval")
    for _ in range(100000):
        delays = rng.uniform(0.0, span, size=K)
        if K == 1:
            return delays
        diff = delays[:, None] - delays[None, :]
        circ = np.abs((diff + span / 2.0) % span - span / 2.0)
        circ[np.diag_indices(K)] = np.inf
        if circ.min() >= min_separation:
            return delays
    raise RuntimeError("rejection sampling failed to find a feasible delay set")


@functools.lru_cache(maxsize=4)
def _build_context(config: ExperimentConfig):
    spec = PulseSpec(f0=config.f0, delta_f=config.delta_f, T=config.T)
    grid = SamplingGrid(N=config.N, Ts=config.Ts)
    dictionary = build_dictionary("tde", spec, grid, config.c)
    needs_arcs = any(
        a in ("poibomp", "ccbp", "paibomp", "paibomp_ccbp") for a in config.algorithms
    )
    arcs = build_arc_bases(dictionary) if needs_arcs else None
    needs_zeta = any(a in ("ccbp", "paibomp_ccbp") for a in config.algorithms)
    zeta = (
        compute_zeta("tde", grid, config.c, spec=spec).zeta if needs_zeta else 0.0
    )
    return spec, grid, dictionary, arcs, zeta


def _noise_energy(config: ExperimentConfig, f: np.ndarray, y_clean: np.ndarray, snr: float) -> float:
    # Expected noise energy in the measurement vector.  Signal noise of
    # total energy ||f||^2/snr passes through the operator, whose squared
    # Frobenius norm is N, landing at the same expected energy.
    if np.isinf(snr):
        return 0.0
    if config.noise_kind == "signal":
        return float(np.linalg.norm(f) ** 2 / snr)
    return float(np.linalg.norm(y_clean) ** 2 / snr)


def _run_algorithm(
    name: str,
    y: np.ndarray,
    op,
    dictionary,
    arcs,
    spec,
    grid,
    config: ExperimentConfig,
    sigma_sq: float,
    zeta: float,
    noise_scale: float,
) -> EstimationResult:
    base = EstimatorConfig(
        algorithm=name,
        K=config.K,
        eta=config.eta,
        xi=config.xi,
        lam=config.lam,
        sigma_sq=sigma_sq,
        zeta=zeta,
        music=MusicConfig(noise_scale=noise_scale),
    )
    if name == "bomp":
        return run_bomp(y, op, dictionary, base)
    if name == "paibomp":
        return run_ibomp(y, op, dictionary, arcs, parabolic_handle, base)
    if name == "poibomp":
        return run_ibomp(y, op, dictionary, arcs, polar_handle, base)
    if name == "paibomp_ccbp":
        cfg = replace(base, refine_with_ccbp=True)
        return run_ibomp(y, op, dictionary, arcs, parabolic_handle, cfg)
    if name == "ccbp":
        return run_ccbp(y, op, dictionary, arcs, base)
    if name == "tde_music":
        return run_tde_music(y, op, dictionary, spec, grid, base)
    raise ValueError(f"unknown algorithm {name!r}")


def _run_trial(config: ExperimentConfig, trial: int) -> list[MetricRecord]:
    spec, grid, dictionary, arcs, zeta = _build_context(config)
    span = grid.span
    delta = dictionary.spacing
    rng = np.random.default_rng((config.seed, trial))
    delays = draw_delays(rng, config.K, span, config.min_separation)
    amplitudes = rng.uniform(1, 10, config.K) + 1j * rng.uniform(1, 10, config.K)
    truth = SparseSignalParams(amplitudes=amplitudes, delays=delays)
    f = synthesize(truth, spec, grid)
    records: list[MetricRecord] = []
    for ki, kappa in enumerate(config.kappa_grid):
        op = build_operator(config.N, kappa, seed=_sub_seed(config.seed, trial, ki))
        y_clean = op.matrix @ f
        for si, snr in enumerate(config.snr_grid):
            if np.isinf(snr):
                noise = NoiseSpec(kind="none")
            else:
                noise = NoiseSpec(
                    kind=config.noise_kind,
                    snr=float(snr),
                    seed=_sub_seed(config.seed, trial, ki, si),
                )
            y = measure(op, f, noise)
            noise_energy = _noise_energy(config, f, y_clean, snr)
            noise_scale = float(np.sqrt(noise_energy / op.M)) if noise_energy else 0.0
            for name in config.algorithms:
                try:
                    result = _run_algorithm(
                        name,
                        y,
                        op,
                        dictionary,
                        arcs,
                        spec,
                        grid,
                        config,
                        sigma_sq=noise_energy,
                        zeta=zeta,
                        noise_scale=noise_scale,
                    )
                    rec = match_and_score(
                        truth, result, delta=delta, span=span, f_true=f
                    )
                except Exception as exc:  # per-trial failures must not kill the run
                    rec = MetricRecord(
                        b_mse_us2=(delta / 2.0) ** 2 * 1e12,
                        f_rel_err=1.0,
                        elapsed_s=float("nan"),
                        status=f"error: {type(exc).__name__}: {exc}",
                    )
                records.append(
                    replace(
                        rec,
                        case=config.case,
                        algorithm=name,
                        kappa=float(kappa),
                        snr=float(snr),
                        trial=trial,
                    )
                )
    return records


def _sub_seed(*parts: int) -> int:
    # Stable child seed from integer coordinates.
    ss = np.random.SeedSequence(list(parts))
    return int(ss.generate_state(1)[0])


def run_case(config: ExperimentConfig):
    """Yield one MetricRecord per (trial, kappa, snr, algorithm).

    With jobs > 1 trials run in a process pool; records are still yielded
    in trial order so output is identical to a serial run.
    """
    if config.jobs <= 1:
        for trial in range(config.trials):
            yield from _run_trial(config, trial)
        return
    with ProcessPoolExecutor(max_workers=config.jobs) as pool:
        futures = [
            pool.submit(_run_trial, config, trial) for trial in range(config.trials)
        ]
        for future in futures:
            yield from future.result()


def emit_csv(records, path: str) -> None:
    """Write records under the fixed header; floats keep full precision."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER.split(","))
        for rec in records:
            writer.writerow(
                [
                    rec.case,
                    rec.algorithm,
                    repr(float(rec.kappa)),
                    repr(float(rec.snr)),
                    str(int(rec.trial)),
                    repr(float(rec.b_mse_us2)),
                    repr(float(rec.f_rel_err)),
                    repr(float(rec.elapsed_s)),
                    rec.status,
                ]
            )


def parse_csv(path: str) -> list[MetricRecord]:
    """Read back a results file written by emit_csv."""
    records: list[MetricRecord] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != CSV_HEADER.split(","):
            raise ValueError(f"unexpected header {header!r}")
        for row in reader:
            records.append(
                MetricRecord(
                    case=row[0],
                    algorithm=row[1],
                    kappa=float(row[2]),
                    snr=float(row[3]),
                    trial=int(row[4]),
                    b_mse_us2=float(row[5]),
                    f_rel_err=float(row[6]),
                    elapsed_s=float(row[7]),
                    status=row[8],
                )
            )
    return records
