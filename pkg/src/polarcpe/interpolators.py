"""Single-atom interpolation functions shared by the greedy estimators.

Given the residual and the index of the strongest dictionary atom, an
interpolation function refines the translation parameter to a value
between grid points.  Two are provided: a three-point parabolic fit on
the correlation magnitudes, and a polar fit that solves a small least
squares problem on the arc approximation of the manifold.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dictionary import ArcBasisSet, ParametricDictionary, arc_frame_at
from .sensing import MeasurementOperator

__all__ = [
    "ProxyVector",
    "InterpolationEstimate",
    "UnstableFitError",
    "compute_proxy",
    "parabolic_interpolate",
    "polar_interpolate",
]


@dataclass(frozen=True)
class ProxyVector:
    """Correlations R[m] = <y_res, A g(b_m)> against every measured atom."""

    values: np.ndarray


@dataclass(frozen=True)
class InterpolationEstimate:
    """Refined translation parameter plus an amplitude hint.

    b_hat always lies within half a grid step of the selected atom's
    parameter.  diagnostics records the local fit residual and any
    fallbacks taken.
    """

    b_hat: float
    amplitude_hint: complex
    diagnostics: dict = field(default_factory=dict)


class UnstableFitError(RuntimeError):
    """The local least squares fit carries no usable amplitude."""


def compute_proxy(
    y_res: np.ndarray,
    op: MeasurementOperator,
    dictionary: ParametricDictionary,
    measured_atoms: np.ndarray | None = None,
) -> ProxyVector:
    """Correlate the residual against all measured atoms.

    measured_atoms may carry a precomputed A @ D to avoid repeating the
    matrix product inside greedy loops.
    """
    if measured_atoms is None:
        measured_atoms = op.matrix @ dictionary.atoms
    return ProxyVector(values=measured_atoms.conj().T @ y_res)


def parabolic_interpolate(
    proxy: ProxyVector,
    i_n: int,
    delta: float,
    params: np.ndarray | None = None,
    circular: bool = True,
) -> InterpolationEstimate:
    """Three-point parabola through |R| at the peak and its neighbours.

    The vertex offset is clamped to half a grid step.  Neighbour indices
    wrap around for circulant (delay) grids and clamp at the edges
    otherwise.  A flat curvature falls back to the on-grid parameter.
    """
    mags = np.abs(proxy.values)
    P = mags.size
    if circular:
        lo, hi = (i_n - 1) % P, (i_n + 1) % P
    else:
        lo, hi = max(i_n - 1, 0), min(i_n + 1, P - 1)
    r_lo, r_mid, r_hi = mags[lo], mags[i_n], mags[hi]
    denom = r_hi - 2.0 * r_mid + r_lo
    scale = max(r_lo, r_mid, r_hi)
    diagnostics: dict = {}
    if abs(denom) <= 1e-12 * max(scale, 1e-300):
        offset = 0.0
        diagnostics["flat_curvature"] = True
    else:
        offset = -(delta / 2.0) * (r_hi - r_lo) / denom
        offset = float(np.clip(offset, -delta / 2.0, delta / 2.0))
    base = float(params[i_n]) if params is not None else i_n * delta
    return InterpolationEstimate(
        b_hat=base + offset,
        amplitude_hint=complex(proxy.values[i_n]),
        diagnostics=diagnostics,
    )


def _fit_on_frame(
    y_res: np.ndarray,
    frame: np.ndarray,
    r: float,
    theta: float,
    ngrid: int,
) -> tuple[float, complex, float]:
    """Best angle and amplitude for y_res ~ a (c + r cos(phi) u + r sin(phi) v).

    frame stacks the measured (c, u, v) as rows.  The angle is located on
    a dense grid over [-theta, theta] and refined with a parabola on the
    projection score; the score of a candidate angle needs only the three
    inner products with y_res and the 3x3 Gram of the frame.
    """
    py = frame.conj() @ y_res
    G = frame.conj() @ frame.T
    phis = np.linspace(-theta, theta, ngrid)
    W = np.stack([np.ones_like(phis), r * np.cos(phis), r * np.sin(phis)])
    num = np.abs(W.T @ py) ** 2
    den = np.einsum("ji,jk,ki->i", W, G, W).real
    score = num / np.maximum(den, 1e-300)
    k = int(np.argmax(score))
    phi = phis[k]
    if 0 < k < ngrid - 1:
        s_lo, s_mid, s_hi = score[k - 1], score[k], score[k + 1]
        curv = s_lo - 2.0 * s_mid + s_hi
        if abs(curv) > 0:
            step = float(np.clip(0.5 * (s_lo - s_hi) / curv, -0.5, 0.5))
            phi = phi + step * (phis[1] - phis[0])
    w = np.array([1.0, r * np.cos(phi), r * np.sin(phi)])
    den_w = float((w @ G @ w).real)
    a = (w @ py) / max(den_w, 1e-300)
    fit = frame.T @ (a * w)
    residual = float(np.linalg.norm(y_res - fit))
    return float(phi), complex(a), residual


def polar_interpolate(
    y_res: np.ndarray,
    op: MeasurementOperator,
    arcs: ArcBasisSet,
    i_n: int,
    iterations: int = 6,
    ngrid: int = 256,
) -> InterpolationEstimate:
    """Off-grid refinement by least squares on the polar arc.

    Each pass fits the three unknowns x = (a, a r cos(phi), a r sin(phi))
    of the arc model to the residual and reads the offset from
    arctan(Re(x3 / x2)) scaled by delta / (2 theta).  Because the fitted
    amplitude is complex and the arc only approximates the manifold, a
    single pass is limited by the arc's approximation error; the fit is
    therefore repeated on re-centred arcs of shrinking span, which drives
    the offset error far below the grid step while every pass keeps the
    same three-unknown structure.

    Raises UnstableFitError when the first pass carries no amplitude
    (|x2| below 1e-12); callers fall back to the on-grid parameter.
    """
    delta = arcs.spacing
    dictionary = arcs.dictionary
    A = op.matrix
    b_center = float(arcs.params[i_n])
    half = delta / 2.0
    residual = float("nan")
    amp = 0j
    for it in range(iterations):
        if it == 0:
            c_vec = arcs.c_vecs[:, i_n]
            u_vec = arcs.u_vecs[:, i_n]
            v_vec = arcs.v_vecs[:, i_n]
            theta = arcs.theta
        else:
            c_vec, u_vec, v_vec, theta = arc_frame_at(dictionary, b_center, half)
        frame = np.stack([A @ c_vec, A @ u_vec, A @ v_vec])
        phi, amp, residual = _fit_on_frame(y_res, frame, arcs.r, theta, ngrid)
        x2 = amp * arcs.r * np.cos(phi)
        x3 = amp * arcs.r * np.sin(phi)
        if abs(x2) < 1e-12:
            raise UnstableFitError(f"degenerate arc fit at atom {i_n}")
        offset = np.arctan(np.real(x3 / x2)) * (2.0 * half) / (2.0 * theta)
        b_center += float(np.clip(offset, -half, half))
        half = max(half / 4.0, 1e-6 * delta)
    base = float(arcs.params[i_n])
    b_hat = base + float(np.clip(b_center - base, -delta / 2.0, delta / 2.0))
    return InterpolationEstimate(
        b_hat=b_hat,
        amplitude_hint=amp,
        diagnostics={"residual": residual, "iterations": iterations},
    )
