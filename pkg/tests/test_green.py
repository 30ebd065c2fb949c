import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from killedwalk import green
from killedwalk.errors import DomainError
from killedwalk.jump_model import JumpDistribution

from conftest import M1, M2

m1 = JumpDistribution.from_dict(M1)
m2 = JumpDistribution.from_dict(M2)
BOX = green.TruncationBox((12,), 14)


@pytest.mark.parametrize("model", [m1, m2])
def test_direct_matches_nstep_oracle(model):
    f = green.green_killed(model, (2, 3), BOX)
    oracle = green.nstep_green(model, (2, 3), BOX, green.KILLED, 4000)
    np.testing.assert_allclose(f.values, oracle, atol=1e-9)


def test_sweep_matches_direct():
    a = green.green_killed(m1, (2, 3), BOX, method="direct")
    b = green.green_killed(m1, (2, 3), BOX, method="sweep", tol=1e-12)
    np.testing.assert_allclose(a.values, b.values, atol=1e-9)
    assert b.iterations > 0


def test_free_walk_field():
    box = green.TruncationBox((12,), 12, -12)
    f = green.green_free(m1, (0, 0), box)
    oracle = green.nstep_green(m1, (0, 0), box, green.FREE, 4000)
    np.testing.assert_allclose(f.values, oracle, atol=1e-9)
    assert f.value((0, 0)) > 1


def test_free_walk_rejects_zero_mean():
    zm = JumpDistribution.from_dict({(1, 0): 0.25, (-1, 0): 0.25, (0, 1): 0.25, (0, -1): 0.25})
    with pytest.raises(DomainError):
        green.green_free(zm, (0, 0), green.TruncationBox((5,), 5, -5))


def test_green_matches_monte_carlo():
    f = green.green_killed(m1, (1, 2), green.TruncationBox((60,), 60))
    est, se = green.mc_green(m1, (0, 1), (1, 2), green.KILLED, 200_000, 2_000, seed=5)
    assert abs(f.value((0, 1)) - est) < 4 * se


def test_twisted_identity_small_box():
    err = green.twisted_green_identity_check(m1, [0.0, math.log(2 / 3)], [((0, 1), (3, 2)), ((1, 4), (0, 1))], BOX)
    assert err < 1e-9


def test_twisted_box_mismatch_rejected():
    with pytest.raises(DomainError):
        green.twisted_green_identity_check(m1, [0.0, 0.0], [((0, 1), (0, 2))], BOX, twisted_box=BOX.doubled())


def test_outside_box_is_zero():
    f = green.green_killed(m1, (0, 2), BOX)
    assert f.value((0, 0)) == 0.0 and f.value((100, 1)) == 0.0


def test_schedule_parsing():
    assert green.parse_schedule("diag:5..15:5", 2) == [(5, (5, 5)), (10, (10, 10)), (15, (15, 15))]
    assert green.parse_schedule("wall:5..5:1", 2) == [(5, (5, 1))]
    assert green.parse_schedule("1,2;3,4", 2) == [(1, (1, 2)), (2, (3, 4))]
    with pytest.raises(ValueError):
        green.parse_schedule("diag:9..5:1", 2)


def test_eventually_decreasing():
    assert green.eventually_decreasing([5, 4, 3, 2, 1, 0.5, 0.4])
    assert not green.eventually_decreasing([5, 4, 3, 2, 1, 6, 0.4])


def test_csv_shape():
    tab = green.ConvergenceTable([green.ConvergenceRow(5, 7.0710678118654755, 1.5, 5 / 3, 1 / 6, (0, 2))])
    lines = tab.to_csv().splitlines()
    assert lines[0] == "n,abs_zn,kernel,limit,abs_err"
    assert lines[1].split(",")[3] == format(5 / 3, ".17g")


def test_communication_constants():
    theta, C = green.communication_constants(m1, [(0, 1), (3, 1), (0, 4)])
    assert theta == pytest.approx(0.2)
    assert C >= 1
    assert green.shortest_path_length(m1, (0, 1), (3, 1)) == 3


@settings(max_examples=15, deadline=None)
@given(st.integers(-8, 8), st.integers(1, 10))
def test_truncation_monotone(x, y):
    # a bigger box can only add paths, so the killed Green function grows
    small = green.green_killed(m2, (1, 3), green.TruncationBox((10,), 12))
    big = green.green_killed(m2, (1, 3), green.TruncationBox((20,), 24))
    assert big.value((x, y)) >= small.value((x, y)) - 1e-12


@settings(max_examples=15, deadline=None)
@given(st.integers(-8, 8), st.integers(1, 10))
def test_killed_below_free(x, y):
    free = green.green_free(m1, (1, 3), green.TruncationBox((12,), 14, -14))
    killed = green.green_killed(m1, (1, 3), BOX)
    assert killed.value((x, y)) <= free.value((x, y)) + 1e-12
