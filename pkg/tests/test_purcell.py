import math

import pytest
from hypothesis import given, settings, strategies as st

from qreset.purcell import PurcellQuery, effective_decay, purcell_time, required_detuning

pos = st.floats(1e-3, 1e3)


def test_formula_examples():
    assert purcell_time(PurcellQuery(10.0, 1.0, 0.01)) == pytest.approx(1e4, rel=1e-12)
    t1 = purcell_time(PurcellQuery(3.0, 1.0, 0.2))
    assert purcell_time(PurcellQuery(6.0, 1.0, 0.2)) == pytest.approx(4 * t1, rel=1e-14)


def test_effective_decay_examples():
    assert effective_decay(3.0, 3.0) == 3.0
    assert effective_decay(0.0, 2.0) == 0.0
    assert effective_decay(2.0, 4.0) == 1.0
    with pytest.raises(ValueError):
        effective_decay(1.0, 0.0)
    with pytest.raises(ValueError):
        effective_decay(-1.0, 1.0)


def test_composition_with_effective_decay():
    d, g, lam, kap = 7.0, 1.0, 1.5, 3.0
    t = purcell_time(PurcellQuery(d, g, effective_decay(lam, kap)))
    assert t == pytest.approx((d / g) ** 2 * kap / lam ** 2, rel=1e-14)


@settings(max_examples=200, deadline=None)
@given(pos, pos, pos)
def test_inverse_round_trip(delta, g, rate):
    q = PurcellQuery(delta, g, rate)
    t = purcell_time(q)
    assert t > 0
    assert required_detuning(t, g, rate) == pytest.approx(delta, rel=1e-12)


def test_doubling_rate_scales_detuning():
    assert required_detuning(5.0, 1.0, 2.0) == pytest.approx(math.sqrt(2) * required_detuning(5.0, 1.0, 1.0),
                                                             rel=1e-14)


@pytest.mark.parametrize("args", [(0.0, 1.0, 1.0), (1.0, -1.0, 1.0), (1.0, 1.0, math.inf)])
def test_positivity(args):
    with pytest.raises(ValueError):
        PurcellQuery(*args)
    with pytest.raises(ValueError):
        required_detuning(*args)


def test_fifty_microsecond_example():
    # g/2pi = 10 MHz, gamma = 0.5 g, T = 50 us
    g = 2 * math.pi * 10e6
    delta = required_detuning(50e-6, g, 0.5 * g)
    assert delta / (2 * math.pi) == pytest.approx(396.3e6, rel=1e-3)
    # the quoted "about 2.5 GHz" matches the angular value, not delta / 2pi
    assert delta == pytest.approx(2.49e9, rel=1e-2)
