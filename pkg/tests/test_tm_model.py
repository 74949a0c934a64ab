import numpy as np
import pytest

from src.core.constants import PHYS, ghz_to_rad
from src.core.errors import InfiniteTemperatureError, InvalidArgumentError, ResolutionError
from src.models.line import ElectronProfile, EprLine
from src.models.tm_state import TmState
from src.services.line_service import make_epr_line, thermal_electron_profile
from src.services.polarization import (
    ce_pair_polarization,
    spin_temperature_from_polarization,
    zeeman_temperature_scale,
)
from src.services.tm_model import (
    borghini_steady_state,
    nuclear_polarization,
    profile_holeburn,
    profile_homogeneous,
    profile_inhomogeneous,
)

OMEGA_MW = ghz_to_rad(188.0)


def _two_packet_line(nucleus):
    omega0 = ghz_to_rad(188.0)
    return EprLine(grid=np.array([omega0, omega0 + nucleus.omega]), weights=np.full(2, 0.5 / nucleus.omega))


def test_two_packets_reduce_to_cross_effect(c13, rng):
    line = _two_packet_line(c13)
    for P1, P2 in rng.uniform(-1.0, 1.0, (1000, 2)):
        profile = ElectronProfile(line=line, values=[P1, P2])
        assert nuclear_polarization(profile, c13) == pytest.approx(ce_pair_polarization(P1, P2), abs=1e-12)


def test_uniform_profile_gives_zero(standard_line, c13):
    profile = ElectronProfile(line=standard_line, values=np.full(standard_line.n_points, 0.7))
    assert nuclear_polarization(profile, c13) == 0.0


def test_sign_flip_antisymmetry(standard_line, c13, rng):
    values = rng.uniform(-1.0, 1.0, standard_line.n_points)
    P = nuclear_polarization(ElectronProfile(line=standard_line, values=values), c13)
    flipped = nuclear_polarization(ElectronProfile(line=standard_line, values=-values), c13)
    assert flipped == -P


def test_line_narrower_than_larmor_shift_has_no_pairs(h1):
    line = make_epr_line("rectangular", ghz_to_rad(188.2), h1.omega * 0.5, 11, snap_to=h1.omega)
    profile = thermal_electron_profile(line, 1.5)
    assert nuclear_polarization(profile, h1) == 0.0


def test_coarse_grid_raises_resolution_error(c13):
    line = make_epr_line("rectangular", ghz_to_rad(188.2), ghz_to_rad(2.0), 3)
    with pytest.raises(ResolutionError):
        nuclear_polarization(thermal_electron_profile(line, 1.5), c13)


def test_tm_profile_gives_nuclear_boltzmann_polarization(standard_line, c13):
    T_s = 0.01
    profile = profile_inhomogeneous(standard_line, TmState(T_s=T_s, omega_mw=OMEGA_MW))
    expected = np.tanh(zeeman_temperature_scale(c13) / T_s)
    assert nuclear_polarization(profile, c13) == pytest.approx(expected, rel=1e-9)


def test_thermal_profile_gives_lattice_polarization(standard_line, c13):
    P = nuclear_polarization(thermal_electron_profile(standard_line, 1.5), c13)
    assert P == pytest.approx(np.tanh(zeeman_temperature_scale(c13) / 1.5), rel=1e-6)


@pytest.mark.parametrize("nucleus", ["c13", "h1"])
@pytest.mark.parametrize("T", [1.5, 4.0, 10.0])
def test_thermal_profile_maps_back_to_the_bath_temperature(request, nucleus, T):
    spec = request.getfixturevalue(nucleus)
    line = make_epr_line("rectangular", ghz_to_rad(188.2), ghz_to_rad(0.6), 201, snap_to=spec.omega)
    P = nuclear_polarization(thermal_electron_profile(line, T), spec)
    assert P > 0
    assert spin_temperature_from_polarization(P, spec) == pytest.approx(T, rel=1e-6)


def test_nuclei_share_the_borghini_spin_temperature(standard_line, c13):
    tm = borghini_steady_state(standard_line, OMEGA_MW, 1.5)
    P = nuclear_polarization(profile_inhomogeneous(standard_line, tm), c13)
    assert spin_temperature_from_polarization(P, c13) == pytest.approx(tm.T_s, rel=1e-9)


def test_nuclear_polarization_is_bounded(standard_line, c13, rng):
    for _ in range(200):
        values = rng.uniform(-1.0, 1.0, standard_line.n_points)
        assert abs(nuclear_polarization(ElectronProfile(line=standard_line, values=values), c13)) <= 1.0


def test_grid_convergence_for_tm_profiles(c13):
    results = []
    for n in (201, 2001):
        line = make_epr_line("gaussian", ghz_to_rad(188.2), ghz_to_rad(0.4), n, snap_to=c13.omega)
        profile = profile_inhomogeneous(line, TmState(T_s=0.02, omega_mw=ghz_to_rad(188.1)))
        results.append(nuclear_polarization(profile, c13))
    assert abs(results[0] - results[1]) < 1e-3


def test_regime_efficiency_ordering(standard_line, c13):
    T = 1.5
    tm = borghini_steady_state(standard_line, OMEGA_MW, T)
    inhomogeneous = nuclear_polarization(profile_inhomogeneous(standard_line, tm), c13)
    homogeneous = nuclear_polarization(profile_homogeneous(standard_line, T, 0.5), c13)
    hole = nuclear_polarization(profile_holeburn(standard_line, T, OMEGA_MW, 2 * standard_line.spacing, 1.0), c13)
    assert abs(inhomogeneous) > abs(homogeneous)
    assert abs(inhomogeneous) / abs(hole) > 10


def test_narrow_hole_keeps_the_deficit_near_the_irradiation(standard_line):
    hole_width = 2 * standard_line.spacing
    thermal = thermal_electron_profile(standard_line, 1.5)
    profile = profile_holeburn(standard_line, 1.5, OMEGA_MW, hole_width, 1.0)
    deficit = standard_line.weights * np.abs(thermal.values - profile.values)
    near = np.abs(standard_line.grid - OMEGA_MW) <= 5 * hole_width
    assert deficit[near].sum() / deficit.sum() >= 0.9


def test_full_saturation_gives_zero(standard_line, c13):
    assert nuclear_polarization(profile_homogeneous(standard_line, 1.5, 1.0), c13) == 0.0


def test_hole_wider_than_line_saturates_homogeneously(standard_line, c13):
    width = 1e4 * (standard_line.grid[-1] - standard_line.grid[0])
    profile = profile_holeburn(standard_line, 1.5, OMEGA_MW, width, 1.0)
    assert np.max(np.abs(profile.values)) < 1e-6
    assert abs(nuclear_polarization(profile, c13)) < 1e-6


def test_profile_argument_guards(standard_line):
    with pytest.raises(InvalidArgumentError):
        profile_homogeneous(standard_line, 1.5, 1.2)
    with pytest.raises(InvalidArgumentError):
        profile_holeburn(standard_line, 1.5, OMEGA_MW, 0.0, 1.0)
    with pytest.raises(InvalidArgumentError):
        profile_holeburn(standard_line, 1.5, OMEGA_MW, 1e6, 1.5)


def test_borghini_root_is_stationary(standard_line):
    T = 1.5
    tm = borghini_steady_state(standard_line, OMEGA_MW, T)
    u = standard_line.grid - OMEGA_MW
    g = standard_line.weights
    p0 = thermal_electron_profile(standard_line, T).values
    tm_values = -np.tanh(PHYS.hbar * u / (2 * PHYS.kB * tm.T_s))
    moment = np.sum(g * u * (p0 - tm_values)) / np.sum(g * np.abs(u))
    assert abs(moment) < 1e-9
    # irradiation below the line center gives a positive spin temperature
    assert tm.T_s > 0
    assert tm.omega_mw == OMEGA_MW


def test_borghini_irradiation_at_center_of_symmetric_line(standard_line):
    reference = ElectronProfile(line=standard_line, values=np.full(standard_line.n_points, 0.9))
    with pytest.raises(InfiniteTemperatureError) as info:
        borghini_steady_state(standard_line, standard_line.center, 1.5, reference=reference)
    assert info.value.state.T_s == float("inf")
    assert info.value.state.omega_mw == standard_line.center


def test_borghini_mirror_irradiation_flips_sign(standard_line):
    reference = ElectronProfile(line=standard_line, values=np.full(standard_line.n_points, 0.9))
    offset = 20 * standard_line.spacing
    below = borghini_steady_state(standard_line, standard_line.center - offset, 1.5, reference=reference)
    above = borghini_steady_state(standard_line, standard_line.center + offset, 1.5, reference=reference)
    assert below.T_s == pytest.approx(-above.T_s, rel=1e-6)


def test_borghini_edge_irradiation_weakens_with_temperature():
    line = make_epr_line("rectangular", ghz_to_rad(188.2), ghz_to_rad(0.6), 201)
    spin_temperatures = [borghini_steady_state(line, line.grid[0], T).T_s for T in (1.5, 3.0, 6.0)]
    assert all(T_s > 0 for T_s in spin_temperatures)
    assert spin_temperatures[0] < spin_temperatures[1] < spin_temperatures[2]


def test_borghini_converges_under_grid_refinement():
    coarse = make_epr_line("rectangular", ghz_to_rad(188.2), ghz_to_rad(0.6), 201)
    fine = make_epr_line("rectangular", ghz_to_rad(188.2), ghz_to_rad(0.6), 2001)
    a = borghini_steady_state(coarse, coarse.grid[0], 1.5)
    b = borghini_steady_state(fine, fine.grid[0], 1.5)
    assert a.T_s == pytest.approx(b.T_s, rel=2e-2)


def test_borghini_rejects_frequency_outside_line(standard_line):
    with pytest.raises(InvalidArgumentError):
        borghini_steady_state(standard_line, ghz_to_rad(190.0), 1.5)
