"""Shared fixtures: small grids, dictionaries, arc bases, zeta reports.

Session scope keeps the dictionary and arc builds amortized across the
whole run; every fixture object is immutable after construction.
"""

from __future__ import annotations

import numpy as np
import pytest

import polarcpe as pc


def circular_error(a: float, b: float, span: float | None) -> float:
    """Absolute parameter error on the circular interval [0, span)."""
    d = a - b
    if span is not None:
        d = (d + span / 2.0) % span - span / 2.0
    return abs(d)


@pytest.fixture(scope="session")
def pulse_spec() -> pc.PulseSpec:
    return pc.PulseSpec()


@pytest.fixture(scope="session")
def grid100() -> pc.SamplingGrid:
    return pc.SamplingGrid(N=100, Ts=2e-8)


@pytest.fixture(scope="session")
def grid500() -> pc.SamplingGrid:
    return pc.SamplingGrid(N=500, Ts=2e-8)


@pytest.fixture(scope="session")
def tde100_c1(pulse_spec, grid100) -> pc.ParametricDictionary:
    return pc.build_dictionary("tde", pulse_spec, grid100, 1)


@pytest.fixture(scope="session")
def tde100_c2(pulse_spec, grid100) -> pc.ParametricDictionary:
    return pc.build_dictionary("tde", pulse_spec, grid100, 2)


@pytest.fixture(scope="session")
def tde100_c5(pulse_spec, grid100) -> pc.ParametricDictionary:
    return pc.build_dictionary("tde", pulse_spec, grid100, 5)


@pytest.fixture(scope="session")
def tde500_c1(pulse_spec, grid500) -> pc.ParametricDictionary:
    return pc.build_dictionary("tde", pulse_spec, grid500, 1)


@pytest.fixture(scope="session")
def fe100_c1(grid100) -> pc.ParametricDictionary:
    return pc.build_dictionary("fe", None, grid100, 1)


@pytest.fixture(scope="session")
def fe100_c5(grid100) -> pc.ParametricDictionary:
    return pc.build_dictionary("fe", None, grid100, 5)


@pytest.fixture(scope="session")
def arcs100_c1(tde100_c1) -> pc.ArcBasisSet:
    return pc.build_arc_bases(tde100_c1)


@pytest.fixture(scope="session")
def arcs100_c2(tde100_c2) -> pc.ArcBasisSet:
    return pc.build_arc_bases(tde100_c2)


@pytest.fixture(scope="session")
def arcs100_c5(tde100_c5) -> pc.ArcBasisSet:
    return pc.build_arc_bases(tde100_c5)


@pytest.fixture(scope="session")
def zeta100_c1(grid100) -> pc.ZetaReport:
    return pc.compute_zeta("tde", grid100, 1)


@pytest.fixture(scope="session")
def zeta100_c5(grid100) -> pc.ZetaReport:
    return pc.compute_zeta("tde", grid100, 5)


@pytest.fixture(scope="session")
def identity_op100() -> pc.MeasurementOperator:
    return pc.build_operator(100, 1.0, seed=3)


@pytest.fixture(scope="session")
def cs_op100() -> pc.MeasurementOperator:
    return pc.build_operator(100, 0.4, seed=11)
