import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from killedwalk.errors import DomainError
from killedwalk.ladder import OneDWalk, drift, f_table, mc_boundary_oracle, mean_overshoot, survival_probability


@pytest.mark.parametrize("p,q", [(0.6, 0.4), (0.3, 0.2), (0.45, 0.05)])
def test_gambler_ruin(p, q):
    law = OneDWalk.from_dict({1: p, -1: q, 0: 1 - p - q})
    t = survival_probability(law)
    y = np.arange(1, t.L + 1)
    np.testing.assert_allclose(t.values, 1 - (q / p) ** y, atol=1e-12)


def test_span_two_overshoot():
    t = mean_overshoot(OneDWalk.from_dict({2: 0.25, -2: 0.25, 0: 0.5}))
    np.testing.assert_allclose(t.values[:6], [2, 2, 4, 4, 6, 6], atol=1e-9)


def test_left_continuous_zero_drift_is_identity():
    t = mean_overshoot(OneDWalk.from_dict({1: 0.2, -1: 0.2, 0: 0.6}))
    np.testing.assert_allclose(t.values, np.arange(1, t.L + 1), atol=1e-9)


def test_drift_case_checks():
    with pytest.raises(DomainError):
        survival_probability(OneDWalk.from_dict({1: 0.5, -1: 0.5}))
    with pytest.raises(DomainError):
        mean_overshoot(OneDWalk.from_dict({1: 0.6, -1: 0.4}))
    assert f_table(OneDWalk.from_dict({1: 0.5, -1: 0.5})).drift_case == "zero"


def test_table_bounds():
    t = survival_probability(OneDWalk.from_dict({1: 0.6, -1: 0.4}))
    with pytest.raises(IndexError):
        t(0)
    with pytest.raises(IndexError):
        t(t.L + 1)


def test_mc_survival_matches():
    law = OneDWalk.from_dict({1: 0.3, -1: 0.2, 0: 0.5})
    est = mc_boundary_oracle(law, 1, 100_000, 2_000, seed=11)
    assert abs(est.estimate - 1 / 3) < 4 * est.std_error


@pytest.mark.parametrize(
    "law,kind",
    [({1: 0.45, -1: 0.25, -2: 0.05, 0: 0.25}, "survival"), ({2: 0.25, -2: 0.25, 0: 0.5}, "overshoot")],
)
def test_solve_vs_mc_on_five_heights(law, kind):
    walk = OneDWalk.from_dict(law)
    t = f_table(walk)
    for y0 in (1, 2, 3, 5, 8):
        est = mc_boundary_oracle(walk, y0, 100_000, 5_000, seed=100 + y0, kind=kind)
        exact = t(y0) if kind == "survival" else y0 - t(y0)
        assert abs(est.estimate - exact) <= 3 * est.std_error + 1e-9


def test_mc_overshoot_matches():
    # Y(tau) in {0, -1}; the exact table gives E_1 Y(tau) = -1/2
    law = OneDWalk.from_dict({1: 0.4, -2: 0.2, 0: 0.4})
    t = mean_overshoot(law)
    assert t(1) == pytest.approx(1.5, abs=1e-9)
    # a long horizon keeps the bias from conditioning on tau <= horizon below 1e-4
    est = mc_boundary_oracle(law, 1, 200_000, 1_000_000, seed=3, kind="overshoot")
    assert abs(est.estimate - (1 - t(1))) < 3 * est.std_error


def test_mc_deterministic():
    law = OneDWalk.from_dict({1: 0.3, -1: 0.2, 0: 0.5})
    a = mc_boundary_oracle(law, 2, 5_000, 500, seed=7)
    b = mc_boundary_oracle(law, 2, 5_000, 500, seed=7)
    assert a == b


downs = st.lists(st.floats(0.01, 1.0), min_size=1, max_size=3)


@settings(max_examples=30, deadline=None)
@given(downs, st.floats(0.05, 1.0))
def test_survival_monotone_in_bounds(down, extra):
    # upward mass chosen so the drift is strictly positive
    w_down = {-(i + 1): v for i, v in enumerate(down)}
    need = sum((i + 1) * v for i, v in enumerate(down))
    law = {1: need + extra, **w_down}
    tot = sum(law.values())
    walk = OneDWalk.from_dict({k: v / tot for k, v in law.items()})
    assert drift(walk) > 0
    t = survival_probability(walk)
    assert np.all(t.values > 0) and np.all(t.values <= 1 + 1e-9)
    assert np.all(np.diff(t.values) >= -1e-12)
    assert t.residual < 1e-8
