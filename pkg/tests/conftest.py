"""
Shared fixtures: the two nuclei of the preset, the standard 201-point
rectangular line at 188.2 GHz and a lattice-config factory that sets
T1, Gamma_ff and W_mw directly.
"""

import numpy as np
import pytest

from src.core.config import load_run_config
from src.core.constants import ghz_to_rad
from src.models.line import NucleusSpec
from src.models.packet import LatticeConfig
from src.services.line_service import make_epr_line


@pytest.fixture
def c13() -> NucleusSpec:
    return NucleusSpec.from_mhz("13C", 71.3)


@pytest.fixture
def h1() -> NucleusSpec:
    return NucleusSpec.from_mhz("1H", 285.3)


@pytest.fixture
def standard_line(c13):
    return make_epr_line("rectangular", ghz_to_rad(188.2), ghz_to_rad(0.6), 201, snap_to=c13.omega)


@pytest.fixture
def paper_config():
    return load_run_config()


@pytest.fixture
def lattice():
    """LatticeConfig with T1 = t1, Gamma_ff = gamma and W_mw = w, independent of (c, T)."""

    def build(t1=1.0, gamma=0.0, w=0.01, omega_mw=ghz_to_rad(188.0), T=1.0, mw_width=None):
        return LatticeConfig(
            T=T,
            c=40.0,
            t1_ref=t1,
            T_ref=T,
            gamma_ref=gamma,
            c_ref=40.0,
            w_mw=w,
            mw_width=mw_width,
            omega_mw=omega_mw,
        )

    return build


@pytest.fixture
def rng():
    return np.random.default_rng(20240101)
