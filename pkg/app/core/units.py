"""
Unit handling for scenario files.

Internally every energy is in μeV with ħ = 1, so times are in ħ/μeV and angular
frequencies in rad per ħ/μeV (numerically equal to μeV). Scenario files may carry
unit suffixes; bare numbers are taken to be in these natural units already.
"""
import math
import re
from typing import Annotated, Union

from pydantic import BeforeValidator

HBAR_UEV_NS = 0.6582119569  # ħ in μeV·ns

ENERGY_UNITS = {
    "pev": 1e-6,
    "nev": 1e-3,
    "uev": 1.0,
    "μev": 1.0,
    "µev": 1.0,
    "mev": 1e3,
}

# factors to nanoseconds
TIME_UNITS = {
    "ps": 1e-3,
    "ns": 1.0,
    "us": 1e3,
    "μs": 1e3,
    "µs": 1e3,
    "ms": 1e6,
    "s": 1e9,
}

# factors to rad/ns
FREQUENCY_UNITS = {
    "hz": 2 * math.pi * 1e-9,
    "khz": 2 * math.pi * 1e-6,
    "mhz": 2 * math.pi * 1e-3,
    "ghz": 2 * math.pi,
    "rad/s": 1e-9,
    "rad/ns": 1.0,
}

_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([^\s\d].*?)?\s*$")


def _split(value: str) -> tuple[float, str | None]:
    match = _QUANTITY.match(value)
    if not match:
        raise ValueError(f"cannot read quantity '{value}'")
    number, unit = match.groups()
    return float(number), (unit.lower() if unit else None)


def ns_to_natural(t_ns: float) -> float:
    return t_ns / HBAR_UEV_NS


def natural_to_ns(t: float) -> float:
    return t * HBAR_UEV_NS


def rad_per_ns_to_natural(omega: float) -> float:
    return omega * HBAR_UEV_NS


def hz_to_natural(f_hz: float) -> float:
    """Ordinary frequency in Hz to angular frequency in natural units."""
    return rad_per_ns_to_natural(f_hz * FREQUENCY_UNITS["hz"])


def parse_energy(value: Union[str, float, int]) -> float:
    """'66 peV' -> 6.6e-5 (μeV)."""
    if isinstance(value, (int, float)):
        return float(value)
    number, unit = _split(value)
    if unit is None:
        return number
    if unit not in ENERGY_UNITS:
        raise ValueError(f"unknown energy unit '{unit}' (use peV, neV, ueV, meV)")
    return number * ENERGY_UNITS[unit]


def parse_time(value: Union[str, float, int]) -> float:
    """'500 ns' -> natural time units (ħ/μeV)."""
    if isinstance(value, (int, float)):
        return float(value)
    number, unit = _split(value)
    if unit is None:
        return number
    if unit not in TIME_UNITS:
        raise ValueError(f"unknown time unit '{unit}' (use ps, ns, us, ms, s)")
    return ns_to_natural(number * TIME_UNITS[unit])


def parse_frequency(value: Union[str, float, int]) -> float:
    """'1 Hz' -> 2π·1 Hz in natural angular units."""
    if isinstance(value, (int, float)):
        return float(value)
    number, unit = _split(value)
    if unit is None:
        return number
    if unit not in FREQUENCY_UNITS:
        raise ValueError(f"unknown frequency unit '{unit}' (use Hz, kHz, MHz, GHz, rad/s, rad/ns)")
    return rad_per_ns_to_natural(number * FREQUENCY_UNITS[unit])


Energy = Annotated[float, BeforeValidator(parse_energy)]
Time = Annotated[float, BeforeValidator(parse_time)]
Frequency = Annotated[float, BeforeValidator(parse_frequency)]
