"""Parametric dictionaries, coherence structure and polar arc bases.

A dictionary samples the continuous atom family on a uniform parameter
grid with redundancy c (grid step Ts/c for delays, 1/c for frequency
indices).  For every atom the manifold segment between its half-spacing
neighbours is approximated by a trigonometric arc through the three
anchor atoms; the arc frames (c, u, v) together with the radius r and
half-angle theta are what the polar interpolator and the continuous
basis pursuit program consume.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signals import PulseSpec, SamplingGrid, sample_exponential, sample_pulse

__all__ = [
    "ParametricDictionary",
    "ArcBasisSet",
    "BandExclusionConfig",
    "build_dictionary",
    "atom_vector",
    "coherence",
    "band_exclusion",
    "build_arc_bases",
    "arc_frame_at",
    "interpolate_on_arc",
]


@dataclass(frozen=True, eq=False)
class ParametricDictionary:
    """Sampled atoms over a uniform translation-parameter grid.

    atoms is N x P with unit-norm columns, params the strictly increasing
    parameter of each column, spacing the grid step and redundancy the
    oversampling factor c (P = c*N).  kind is "tde" (delayed chirps) or
    "fe" (complex exponentials).  spec/grid retain the continuous model so
    off-grid atoms can be generated exactly.
    """

    atoms: np.ndarray
    params: np.ndarray
    spacing: float
    redundancy: int
    kind: str
    spec: PulseSpec | None
    grid: SamplingGrid

    @property
    def P(self) -> int:
        return self.atoms.shape[1]

    @property
    def N(self) -> int:
        return self.atoms.shape[0]


@dataclass(frozen=True, eq=False)
class ArcBasisSet:
    """Per-atom polar arc frames.

    Column p of c_vecs/u_vecs/v_vecs holds the arc centre and frame
    vectors for atom p.  The arc through the anchors g(b_p -/+ spacing/2)
    and g(b_p) is g~(b_p + dn) = c + r cos(phi) u + r sin(phi) v with
    phi = 2 dn theta / spacing.
    """

    c_vecs: np.ndarray
    u_vecs: np.ndarray
    v_vecs: np.ndarray
    r: float
    theta: float
    spacing: float
    params: np.ndarray
    dictionary: ParametricDictionary


@dataclass(frozen=True)
class BandExclusionConfig:
    """Coherence-band exclusion level eta plus the numeric-zero floor."""

    eta: float = 0.0
    mu_floor: float = 1e-2

    def __post_init__(self) -> None:
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("eta must lie in [0, 1]")


def build_dictionary(
    kind: str,
    spec: PulseSpec | None,
    grid: SamplingGrid,
    c: int,
) -> ParametricDictionary:
    """Sample the atom family on a grid of P = c*N parameters.

    TDE atoms are chirps delayed by multiples of Ts/c; FE atoms are
    exponentials at frequency indices spaced 1/c apart.
    """
    if int(c) != c or c < 1:
        raise ValueError("redundancy c must be an integer >= 1")
    c = int(c)
    P = c * grid.N
    if kind == "tde":
        if spec is None:
            raise ValueError("tde dictionary needs a PulseSpec")
        spacing = grid.Ts / c
        params = np.arange(P) * spacing
        atoms = np.empty((grid.N, P), dtype=np.complex128)
        for p, b in enumerate(params):
            atoms[:, p] = sample_pulse(spec, grid, float(b))
    elif kind == "fe":
        spacing = 1.0 / c
        params = np.arange(P) * spacing
        n = np.arange(grid.N)
        atoms = np.exp(2j * np.pi * np.outer(n, params) / grid.N) / np.sqrt(grid.N)
    else:
        raise ValueError(f"unknown dictionary kind {kind!r}")
    return ParametricDictionary(
        atoms=atoms,
        params=params,
        spacing=float(spacing),
        redundancy=c,
        kind=kind,
        spec=spec,
        grid=grid,
    )


def atom_vector(dictionary: ParametricDictionary, b: float) -> np.ndarray:
    """Evaluate the continuous atom model at an arbitrary parameter b."""
    if dictionary.kind == "tde":
        span = dictionary.grid.span
        return sample_pulse(dictionary.spec, dictionary.grid, float(np.mod(b, span)))
    return sample_exponential(float(b), dictionary.grid)


def coherence(dictionary: ParametricDictionary, i: int, k: int) -> float:
    """mu(i, k) = |<g(b_i), g(b_k)>|, clipped into [0, 1]."""
    mu = abs(np.vdot(dictionary.atoms[:, i], dictionary.atoms[:, k]))
    return float(min(mu, 1.0))


def band_exclusion(
    dictionary: ParametricDictionary,
    S: "set[int] | list[int] | np.ndarray",
    cfg: BandExclusionConfig,
) -> np.ndarray:
    """Indices whose coherence with any atom in S exceeds max(eta, mu_floor).

    The inequality is strict, so eta = 1 always yields the empty set and
    the floor keeps numerically tiny coherences from ever excluding atoms.
    """
    S = np.asarray(sorted(set(int(s) for s in S)), dtype=int)
    if S.size == 0:
        return np.empty(0, dtype=int)
    level = max(cfg.eta, cfg.mu_floor)
    mu = np.abs(dictionary.atoms.conj().T @ dictionary.atoms[:, S])
    np.minimum(mu, 1.0, out=mu)
    mask = (mu > level).any(axis=1)
    return np.nonzero(mask)[0]


def _arc_matrix(r: float, theta: float) -> np.ndarray:
    # Rows evaluate [1, r cos(phi), r sin(phi)] at phi = -theta, 0, +theta.
    ct, st = np.cos(theta), np.sin(theta)
    return np.array(
        [
            [1.0, r * ct, -r * st],
            [1.0, r, 0.0],
            [1.0, r * ct, r * st],
        ]
    )


def arc_frame_at(
    dictionary: ParametricDictionary, center: float, half_span: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """Arc frame (c, u, v) and half-angle for anchors center -/+ half_span.

    The anchors are evaluated from the continuous model, so the frame is
    exact at all three anchor parameters regardless of the grid.
    """
    g_minus = atom_vector(dictionary, center - half_span)
    g_zero = atom_vector(dictionary, center)
    g_plus = atom_vector(dictionary, center + half_span)
    r = float(np.linalg.norm(g_zero))
    ip = np.real(np.vdot(g_zero, g_minus)) / (r * r)
    theta = float(np.arccos(np.clip(ip, -1.0, 1.0)))
    if theta < 1e-12:
        raise ValueError("degenerate arc: anchor atoms are collinear")
    A = _arc_matrix(r, theta)
    stacked = np.stack([g_minus, g_zero, g_plus])
    cuv = np.linalg.solve(A, stacked)
    return cuv[0], cuv[1], cuv[2], theta


def build_arc_bases(dictionary: ParametricDictionary) -> ArcBasisSet:
    """Build the polar arc frame of every dictionary atom.

    One dense 3x3 solve covers all atoms at once; the result is meant to
    be built once per dictionary and shared read-only.
    """
    half = dictionary.spacing / 2.0
    N, P = dictionary.atoms.shape
    g_minus = np.empty((N, P), dtype=np.complex128)
    g_plus = np.empty((N, P), dtype=np.complex128)
    for p, b in enumerate(dictionary.params):
        g_minus[:, p] = atom_vector(dictionary, b - half)
        g_plus[:, p] = atom_vector(dictionary, b + half)
    g_zero = dictionary.atoms
    r = float(np.linalg.norm(g_zero[:, 0]))
    ip = np.real(np.vdot(g_zero[:, 0], g_minus[:, 0])) / (r * r)
    theta = float(np.arccos(np.clip(ip, -1.0, 1.0)))
    if theta < 1e-12:
        raise ValueError("degenerate arc: anchor atoms are collinear")
    A = _arc_matrix(r, theta)
    stacked = np.stack([g_minus, g_zero, g_plus]).reshape(3, N * P)
    cuv = np.linalg.solve(A, stacked).reshape(3, N, P)
    return ArcBasisSet(
        c_vecs=cuv[0],
        u_vecs=cuv[1],
        v_vecs=cuv[2],
        r=r,
        theta=theta,
        spacing=dictionary.spacing,
        params=dictionary.params,
        dictionary=dictionary,
    )


def interpolate_on_arc(arcs: ArcBasisSet, p: int, delta_n: float) -> np.ndarray:
    """Point on atom p's arc at parameter offset delta_n.

    Valid for |delta_n| <= spacing/2; the two endpoints and the midpoint
    reproduce the anchor atoms exactly.
    """
    half = arcs.spacing / 2.0
    if abs(delta_n) > half * (1.0 + 1e-12):
        raise ValueError(f"offset {delta_n} outside +/-{half}")
    phi = 2.0 * delta_n * arcs.theta / arcs.spacing
    return (
        arcs.c_vecs[:, p]
        + arcs.r * np.cos(phi) * arcs.u_vecs[:, p]
        + arcs.r * np.sin(phi) * arcs.v_vecs[:, p]
    )
