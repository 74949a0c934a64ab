import math

import numpy as np
import pytest

from src.core.errors import IndeterminateInputError, InfiniteTemperatureError, InvalidArgumentError, OutOfRangeError
from src.services.polarization import (
    ce_pair_polarization,
    polarization_from_spin_temperature,
    spin_temperature_from_polarization,
    zeeman_temperature_scale,
)


def test_zeeman_scale_of_carbon(c13):
    assert zeeman_temperature_scale(c13) == pytest.approx(1.710930e-3, rel=1e-5)


@pytest.mark.parametrize("nucleus", ["h1", "c13"])
def test_round_trip_is_exact(nucleus, request, rng):
    spec = request.getfixturevalue(nucleus)
    values = rng.uniform(-1.0, 1.0, 10_000)
    values = values[values != 0.0]
    for P in values:
        back = polarization_from_spin_temperature(spin_temperature_from_polarization(P, spec), spec)
        assert abs(back - P) <= 1e-12 * abs(P)


def test_spin_temperature_falls_as_polarization_grows(c13):
    temperatures = [spin_temperature_from_polarization(P, c13) for P in np.linspace(1e-4, 1 - 1e-6, 500)]
    assert all(b < a for a, b in zip(temperatures, temperatures[1:]))


def test_negative_polarization_gives_negative_temperature(c13):
    assert spin_temperature_from_polarization(-0.3, c13) < 0
    assert spin_temperature_from_polarization(0.3, c13) == pytest.approx(
        -spin_temperature_from_polarization(-0.3, c13)
    )


def test_polarization_guards(c13):
    with pytest.raises(OutOfRangeError):
        spin_temperature_from_polarization(1.0, c13)
    with pytest.raises(OutOfRangeError):
        spin_temperature_from_polarization(-1.2, c13)
    with pytest.raises(InfiniteTemperatureError):
        spin_temperature_from_polarization(0.0, c13)
    with pytest.raises(InvalidArgumentError):
        polarization_from_spin_temperature(0.0, c13)


def test_high_temperature_limit_is_linear(h1):
    T_s = 1.0
    x = zeeman_temperature_scale(h1) / T_s
    assert x < 0.1
    assert abs(polarization_from_spin_temperature(T_s, h1) - x) / x < 0.01


def test_ce_pair_formula(rng):
    for P1, P2 in rng.uniform(-1.0, 1.0, (100, 2)):
        assert ce_pair_polarization(P1, P2) == pytest.approx((P1 - P2) / (1 - P1 * P2), rel=1e-14)
    assert ce_pair_polarization(0.5, 0.5) == 0.0
    assert ce_pair_polarization(1.0, -1.0) == 1.0


def test_ce_pair_guards():
    with pytest.raises(IndeterminateInputError):
        ce_pair_polarization(1.0, 1.0)
    with pytest.raises(InvalidArgumentError):
        ce_pair_polarization(1.2, 0.0)


def test_ce_pair_matches_closed_form_for_thermal_pair(c13):
    # two electrons at equal temperature, split by omega_n, transfer exactly the nuclear Boltzmann polarization
    a = 0.8
    b = math.tanh(math.atanh(a) + zeeman_temperature_scale(c13) / 1e-3)
    expected = -math.tanh(zeeman_temperature_scale(c13) / 1e-3)
    assert ce_pair_polarization(a, b) == pytest.approx(expected, rel=1e-12)
