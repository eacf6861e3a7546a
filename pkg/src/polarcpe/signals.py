"""Continuous-parameter signal models and noise injection.

Two unit-norm atom families are defined: a windowed linear chirp whose
translation parameter is a time delay, and a complex exponential whose
translation parameter is a (possibly fractional) frequency index.  Delays
act circularly on the sampling window so that shifted atoms keep their
norm exactly and the sampled dictionary is circulant on integer shifts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "PulseSpec",
    "SamplingGrid",
    "SparseSignalParams",
    "NoiseSpec",
    "sample_pulse",
    "sample_exponential",
    "synthesize",
    "add_noise",
]


@dataclass(frozen=True)
class PulseSpec:
    """Chirp pulse parameters.

    f0 is the start frequency of the sweep in Hz, delta_f the swept
    bandwidth in Hz and T the pulse duration in seconds.  When
    energy_normalized is set, every sampled instance is rescaled to unit
    l2 norm.
    """

    f0: float = 1e6
    delta_f: float = 40e6
    T: float = 1e-6
    energy_normalized: bool = True

    def __post_init__(self) -> None:
        if self.f0 <= 0 or self.delta_f <= 0 or self.T <= 0:
            raise ValueError("f0, delta_f and T must all be positive")


@dataclass(frozen=True)
class SamplingGrid:
    """Uniform sampling grid: N samples spaced Ts seconds apart."""

    N: int
    Ts: float

    def __post_init__(self) -> None:
        if self.N < 2:
            raise ValueError("need at least two samples")
        if self.Ts <= 0:
            raise ValueError("sampling period must be positive")

    @property
    def span(self) -> float:
        """Length of the circular observation window in seconds."""
        return self.N * self.Ts


@dataclass(frozen=True)
class SparseSignalParams:
    """Amplitudes and translation parameters of a K-sparse signal."""

    amplitudes: np.ndarray
    delays: np.ndarray

    def __post_init__(self) -> None:
        amps = np.atleast_1d(np.asarray(self.amplitudes, dtype=np.complex128))
        dels = np.atleast_1d(np.asarray(self.delays, dtype=np.float64))
        if amps.size != dels.size or amps.size < 1:
            raise ValueError("amplitudes and delays must have equal length >= 1")
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "delays", dels)

    @property
    def K(self) -> int:
        return self.amplitudes.size


@dataclass(frozen=True)
class NoiseSpec:
    """Noise model selector.

    kind is one of "none", "measurement" (injected after the measurement
    operator) or "signal" (injected on the signal itself, before
    compression, which causes noise folding).  snr is the linear ratio of
    the clean energy at the injection point to the expected noise energy.
    """

    kind: str = "none"
    snr: float = np.inf
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("none", "measurement", "signal"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.kind != "none" and not self.snr > 0:
            raise ValueError("snr must be positive when noise is enabled")


def sample_pulse(spec: PulseSpec, grid: SamplingGrid, delay: float) -> np.ndarray:
    """Sample the chirp atom g(t, b) at t = i*Ts for i = 0..N-1.

    The delay b acts modulo N*Ts, so the pulse wraps around the window
    boundary instead of being truncated.  Fractional delays are evaluated
    from the continuous model, never by resampling.
    """
    if not 0.0 <= delay < grid.span:
        raise ValueError(f"delay {delay} outside [0, {grid.span})")
    t = np.arange(grid.N) * grid.Ts
    tau = np.mod(t - delay, grid.span)
    # Smooth taper that actually vanishes at both ends of the support;
    # without it the shifted atoms would not share a common norm.
    window = np.where(
        (tau > 0.0) & (tau < spec.T),
        (spec.T / 2.0) * (1.0 - np.cos(2.0 * np.pi * tau / spec.T)),
        0.0,
    )
    phase = 2.0 * np.pi * (spec.f0 + spec.delta_f / (2.0 * spec.T) * tau) * tau
    g = np.exp(1j * phase) * window
    if spec.energy_normalized:
        g = g / np.linalg.norm(g)
    return g


def sample_exponential(freq_param: float, grid: SamplingGrid) -> np.ndarray:
    """Unit-norm complex exponential atom with fractional frequency index."""
    n = np.arange(grid.N)
    return np.exp(2j * np.pi * freq_param * n / grid.N) / np.sqrt(grid.N)


def synthesize(
    params: SparseSignalParams, spec: PulseSpec, grid: SamplingGrid
) -> np.ndarray:
    """Superpose K delayed pulses: f = sum_k a_k g(b_k)."""
    f = np.zeros(grid.N, dtype=np.complex128)
    for a_k, b_k in zip(params.amplitudes, params.delays):
        f = f + a_k * sample_pulse(spec, grid, float(b_k))
    return f


def add_noise(clean: np.ndarray, spec: NoiseSpec, energy_ref: float) -> np.ndarray:
    """Add circular complex Gaussian noise at a prescribed SNR.

    energy_ref is the squared l2 norm the SNR is referenced to.  The noise
    vector has expected total energy energy_ref / snr, split evenly across
    components, and is a pure function of spec.seed.
    """
    if spec.kind == "none":
        return clean.copy()
    if energy_ref <= 0:
        raise ValueError("energy_ref must be positive")
    rng = np.random.default_rng(spec.seed)
    n = clean.size
    scale = np.sqrt(energy_ref / (spec.snr * n) / 2.0)
    noise = scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return clean + noise
