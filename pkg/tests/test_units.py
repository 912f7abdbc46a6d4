import math

import pytest

from app.core.units import (
    HBAR_UEV_NS,
    natural_to_ns,
    ns_to_natural,
    parse_energy,
    parse_frequency,
    parse_time,
)


def test_energy_suffixes():
    assert parse_energy("66 peV") == pytest.approx(6.6e-5)
    assert parse_energy("5 neV") == pytest.approx(5e-3)
    assert parse_energy("0.5 ueV") == pytest.approx(0.5)
    assert parse_energy("0.5μeV") == pytest.approx(0.5)
    assert parse_energy("1 meV") == pytest.approx(1e3)


def test_bare_numbers_are_natural_units():
    assert parse_energy(0.25) == 0.25
    assert parse_energy("0.25") == 0.25
    assert parse_time(12) == 12.0
    assert parse_frequency("3") == 3.0


def test_time_suffixes():
    assert parse_time("1 us") == pytest.approx(1000.0 / HBAR_UEV_NS)
    assert parse_time("500 ns") == pytest.approx(ns_to_natural(500.0))
    assert natural_to_ns(parse_time("2.5 ns")) == pytest.approx(2.5)


def test_frequency_suffixes():
    assert parse_frequency("1 Hz") == pytest.approx(2 * math.pi * 1e-9 * HBAR_UEV_NS)
    assert parse_frequency("1e4 rad/ns") == pytest.approx(1e4 * HBAR_UEV_NS)
    assert parse_frequency("1 GHz") == pytest.approx(2 * math.pi * HBAR_UEV_NS)


@pytest.mark.parametrize("value", ["3 eV", "abc", "1 parsec"])
def test_bad_energy_rejected(value):
    with pytest.raises(ValueError):
        parse_energy(value)


def test_bad_time_unit_rejected():
    with pytest.raises(ValueError):
        parse_time("4 fortnights")
