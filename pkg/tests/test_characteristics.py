import math

import numpy as np
import pytest

from initjump.characteristics import (build_fan, first_integral, time_grid, trace_forward)
from initjump.errors import InvalidParameter, OutOfStrip

from conftest import make_problem


def test_time_grid_shortens_last_step():
    t = time_grid(1.0, 0.3)
    assert t[-1] == 1.0
    assert np.allclose(np.diff(t)[:-1], 0.3)
    assert 0 < t[-1] - t[-2] < 0.3
    assert len(time_grid(1.0, 1e-3)) == 1001


def test_constant_speed_is_a_translation():
    ch = trace_forward(make_problem(Q="1"), 0.25)
    assert ch.t[0] == 0 and ch.x[0] == 0.25
    assert np.allclose(ch.x, 0.25 + ch.t, atol=1e-14)


def test_linear_in_time_speed():
    ch = trace_forward(make_problem(Q="1 + t"), 0.0)
    # exact: integral of 1 + t over [0, 1]
    assert ch.x[-1] == pytest.approx(1.5, abs=1e-10)


def test_exponential_growth():
    p = make_problem(Q="x", x0_interval=(1.0, 2.0))
    ch = trace_forward(p, 1.0, step=1e-3)
    assert ch.x[-1] == pytest.approx(math.e, abs=1e-8)


def test_nodes_increase():
    ch = trace_forward(make_problem(Q="1 + 0.5*sin(x)"), 0.3)
    assert np.all(np.diff(ch.t) > 0)
    assert np.all(np.diff(ch.x) > 0)
    assert ch.nodes.shape == (len(ch.t), 2)


def test_label_outside_interval():
    with pytest.raises(InvalidParameter):
        trace_forward(make_problem(), 1.5)


def test_first_integral_examples():
    p = make_problem(Q="1")
    assert first_integral(p, 0.5, 0.75) == pytest.approx(0.25, abs=1e-14)
    for x in (0.0, 0.3, 1.0):
        assert first_integral(make_problem(Q="1 + t*x"), 0.0, x) == x
    q = make_problem(Q="x", x0_interval=(1.0, 2.0))
    assert first_integral(q, 1.0, math.e) == pytest.approx(1.0, abs=1e-8)


def test_first_integral_out_of_strip():
    with pytest.raises(OutOfStrip):
        first_integral(make_problem(Q="1"), 0.5, 2.0)


def test_dense_output_fourth_order():
    p = make_problem(Q="x", x0_interval=(1.0, 2.0))
    ch = trace_forward(p, 1.0, step=1e-2)
    tq = np.linspace(0, 1, 333)
    assert np.max(np.abs(ch.x_at(tq) - np.exp(tq))) < 1e-9


def test_fan_three_parallel_lines():
    fan = build_fan(make_problem(Q="1"), 3)
    assert np.array_equal(fan.labels, [0.0, 0.5, 1.0])
    assert np.allclose(fan.X, fan.labels[None, :] + fan.t[:, None], atol=1e-14)


@pytest.mark.parametrize("Q", ["1", "1 + t", "2 - x/3", "1 + 0.5*sin(x)"])
def test_fan_never_crosses(Q):
    fan = build_fan(make_problem(Q=Q), 3)
    assert fan.is_ordered()


def test_fan_monotone_label_map():
    fan = build_fan(make_problem(Q="1 + 0.5*sin(x)"), 33)
    assert fan.count == 33
    assert np.all(np.diff(fan.X[-1]) > 0)
    assert fan.is_ordered()


def test_fan_needs_three():
    with pytest.raises(InvalidParameter):
        build_fan(make_problem(), 2)


def test_lambda_starts_at_zero():
    fan = build_fan(make_problem(Q="1 + t"), 5)
    assert fan.lower().x[0] == 0.0


def test_lambda_reaches_one_for_unit_mean_speed():
    # both speeds integrate to 1 over [0, 1]: lambda(0) = 0, lambda(1) = 1
    for Q in ("1", "0.5 + t"):
        fan = build_fan(make_problem(Q=Q), 5)
        assert fan.lower().x[0] == 0.0
        assert fan.lower().x[-1] == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("Q", ["1", "1+t", "x", "1+0.5*sin(x)"])
def test_round_trip(Q):
    p = make_problem(Q=Q, strict=False)
    rng = np.random.default_rng(7)
    fan = build_fan(p, 9)
    for _ in range(20):
        j = rng.integers(fan.count)
        t = rng.uniform(0, 1)
        ch = fan[j]
        assert abs(first_integral(p, t, ch.x_at(t)) - ch.label) <= 1e-8


def test_round_trip_converges_fourth_order():
    p = make_problem(Q="x", x0_interval=(1.0, 2.0))

    def error(step):
        ch = trace_forward(p, 1.0, step)
        return abs(first_integral(p, 1.0, ch.x[-1], step) - 1.0)

    assert error(0.2) / error(0.1) >= 8.0
