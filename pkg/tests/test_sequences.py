import math

import numpy as np
import pytest
from pydantic import ValidationError

from app.services.model import WorkingPoint
from app.services.sequences import (
    PulseSequence,
    SequenceKind,
    filter_abs2,
    filter_at_zero,
    filter_fn,
    filter_sym,
    lobe_width,
    mean_phase,
    pulse_times,
    switching,
)

OMEGA = np.array([1e-3, 0.37, 1.3, 2.9, 7.7, 15.1, 40.3])


def fid_closed(z):
    return 4 * np.sin(z / 2) ** 2


def se_closed(z):
    return 16 * np.sin(z / 4) ** 4


def cpmg_closed(z, n):
    tail = np.sin(z / 2) ** 2 if n % 2 == 0 else np.cos(z / 2) ** 2
    return 16 * np.sin(z / 4 / n) ** 4 * tail / np.cos(z / 2 / n) ** 2


def test_labels_and_kinds():
    assert PulseSequence.fid().label == "FID"
    assert PulseSequence.spin_echo().label == "SE"
    assert PulseSequence.cpmg(4).label == "CPMG4"
    assert PulseSequence.custom([0.2, 0.7]).kind is SequenceKind.CUSTOM


def test_custom_validation():
    with pytest.raises(ValidationError):
        PulseSequence.custom([0.5, 0.4])
    with pytest.raises(ValidationError):
        PulseSequence.custom([0.0, 0.5])
    with pytest.raises(ValidationError):
        PulseSequence(kind=SequenceKind.CPMG, n=2, fractions=(0.5,))
    with pytest.raises(ValidationError):
        PulseSequence.cpmg(0)


def test_pulse_times():
    assert pulse_times(PulseSequence.fid(), 5.0).size == 0
    assert np.allclose(pulse_times(PulseSequence.spin_echo(), 6.0), [3.0])
    assert np.allclose(pulse_times(PulseSequence.cpmg(4), 8.0), [1.0, 3.0, 5.0, 7.0])
    assert np.allclose(pulse_times(PulseSequence.custom([0.1, 0.6]), 10.0), [1.0, 6.0])


def test_switching_function():
    se = PulseSequence.spin_echo()
    assert switching(PulseSequence.fid(), 4.0, 3.9) == 1
    assert switching(se, 4.0, 1.0) == 1
    assert switching(se, 4.0, 3.0) == -1
    assert switching(PulseSequence.cpmg(2), 4.0, 2.0) == -1
    assert switching(PulseSequence.cpmg(2), 4.0, 3.5) == 1
    with pytest.raises(ValueError):
        switching(se, 4.0, 4.5)


def test_edge_weights():
    assert np.allclose(PulseSequence.fid().edge_weights, [-1.0, 1.0])
    assert np.allclose(PulseSequence.spin_echo().edge_weights, [-1.0, 2.0, -1.0])
    assert np.allclose(PulseSequence.cpmg(2).edge_weights, [-1.0, 2.0, -2.0, 1.0])


@pytest.mark.parametrize("t", [0.7, 3.0, 25.0])
def test_filter_matches_closed_forms(t):
    z = OMEGA * t
    assert np.allclose(filter_abs2(PulseSequence.fid(), t, OMEGA) * OMEGA ** 2, fid_closed(z), rtol=1e-9, atol=1e-12)
    assert np.allclose(filter_abs2(PulseSequence.spin_echo(), t, OMEGA) * OMEGA ** 2, se_closed(z),
                       rtol=1e-9, atol=1e-12)
    for n in (2, 3, 4):
        got = filter_abs2(PulseSequence.cpmg(n), t, OMEGA) * OMEGA ** 2
        assert np.allclose(got, cpmg_closed(z, n), rtol=1e-8, atol=1e-12)


@pytest.mark.parametrize("seq", [
    PulseSequence.spin_echo(),
    PulseSequence.cpmg(2),
    PulseSequence.cpmg(3),
    PulseSequence.cpmg(4),
    PulseSequence.cpmg(8),
    PulseSequence.custom([0.25, 0.75]),
])
def test_balanced_sequences_vanish_at_zero(seq):
    assert seq.is_balanced
    for t in (0.5, 10.0, 1e4):
        assert abs(filter_at_zero(seq, t)) < 1e-12 * t
        assert abs(filter_fn(seq, t, 0.0)) < 1e-12 * t


def test_fid_at_zero_and_small_frequency_branch():
    fid = PulseSequence.fid()
    assert filter_at_zero(fid, 3.0) == 3.0
    assert filter_fn(fid, 3.0, 0.0) == pytest.approx(3.0)
    # both sides of the Taylor switch follow t + iωt²/2
    for w in (0.9e-6 / 3.0, 1.1e-6 / 3.0):
        assert abs(filter_fn(fid, 3.0, w) - (3.0 + 0.5j * w * 9.0)) < 1e-8


@pytest.mark.parametrize("seq", [
    PulseSequence.fid(),
    PulseSequence.spin_echo(),
    PulseSequence.cpmg(3),
    PulseSequence.custom([0.2, 0.7]),
])
def test_negative_frequency_is_conjugate(seq):
    w = np.concatenate(([1e-8, 2e-7], OMEGA))
    assert np.allclose(filter_fn(seq, 3.0, -w), np.conj(filter_fn(seq, 3.0, w)), rtol=1e-12, atol=1e-14)
    assert filter_fn(seq, 3.0, -0.4) == pytest.approx(filter_fn(seq, 3.0, 0.4).conjugate(), rel=1e-12)


def test_unbalanced_custom():
    seq = PulseSequence.custom([0.3])
    assert not seq.is_balanced
    assert seq.net_area == pytest.approx(-0.4)
    assert filter_at_zero(seq, 10.0) == pytest.approx(-4.0)


def test_symmetric_convention_has_same_modulus():
    seq = PulseSequence.cpmg(3)
    assert np.allclose(np.abs(filter_sym(seq, 2.0, OMEGA)), np.abs(filter_fn(seq, 2.0, OMEGA)))
    # SE is real-valued when measured from the midpoint, up to a global sign of i
    sym = filter_sym(PulseSequence.spin_echo(), 2.0, OMEGA)
    assert np.allclose(sym.real, 0.0, atol=1e-12)


def test_mean_phase():
    wp = WorkingPoint(bx=0.3, bz=0.4)
    assert mean_phase(PulseSequence.fid(), wp, 4.0) == pytest.approx(1.0)
    assert mean_phase(PulseSequence.spin_echo(), wp, 4.0) == 0.0


def test_lobe_width():
    assert lobe_width(2.0) == pytest.approx(math.pi)
