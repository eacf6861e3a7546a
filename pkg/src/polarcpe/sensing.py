"""Random-demodulator measurement operator and the noisy measurement model."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signals import NoiseSpec, add_noise

__all__ = ["MeasurementOperator", "build_operator", "measure"]


@dataclass(frozen=True, eq=False)
class MeasurementOperator:
    """Signed integrate-and-dump operator Psi = H diag(eps).

    matrix is M x N with entries in {-1, 0, +1}: each input sample is
    chipped by a Rademacher sign and accumulated into exactly one of M
    output bins.  kappa = M/N is the subsampling ratio and seed fully
    determines the realization.
    """

    matrix: np.ndarray
    kappa: float
    seed: int

    @property
    def M(self) -> int:
        return self.matrix.shape[0]

    @property
    def N(self) -> int:
        return self.matrix.shape[1]


def build_operator(N: int, kappa: float, seed: int) -> MeasurementOperator:
    """Draw a random demodulator with M = round(kappa * N) rows.

    The chipping signs are i.i.d. Rademacher and row r sums a contiguous
    block of chipped samples.  When M does not divide N the block sizes
    differ by one, the first N mod M rows taking the longer blocks.
    """
    if not 0.0 < kappa <= 1.0:
        raise ValueError("kappa must lie in (0, 1]")
    M = int(round(kappa * N))
    if M < 1:
        raise ValueError(f"kappa={kappa} gives no measurement rows at N={N}")
    rng = np.random.default_rng(seed)
    eps = rng.choice(np.array([-1, 1], dtype=np.int64), size=N)
    base, extra = divmod(N, M)
    sizes = np.full(M, base, dtype=int)
    sizes[:extra] += 1
    matrix = np.zeros((M, N), dtype=np.int64)
    start = 0
    for row, size in enumerate(sizes):
        matrix[row, start : start + size] = eps[start : start + size]
        start += size
    return MeasurementOperator(matrix=matrix, kappa=float(kappa), seed=int(seed))


def measure(op: MeasurementOperator, f: np.ndarray, noise: NoiseSpec) -> np.ndarray:
    """Apply the measurement model y = Psi (f + n) + w.

    Signal noise n is injected before the operator (noise folding),
    measurement noise w after; SNR is referenced to the clean energy at
    the respective injection point.
    """
    if f.shape[0] != op.N:
        raise ValueError(f"signal length {f.shape[0]} != operator width {op.N}")
    if noise.kind == "signal":
        f = add_noise(f, noise, float(np.linalg.norm(f) ** 2))
        return op.matrix @ f
    y = op.matrix @ f.astype(np.complex128, copy=False)
    if noise.kind == "measurement":
        y = add_noise(y, noise, float(np.linalg.norm(y) ** 2))
    return y
