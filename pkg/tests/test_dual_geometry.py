import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from killedwalk import dual_geometry as geo
from killedwalk.errors import DomainError
from killedwalk.jump_model import JumpDistribution, mean

from conftest import M1, M2, upper_directions

m1 = JumpDistribution.from_dict(M1)
m2 = JumpDistribution.from_dict(M2)
angles = st.floats(0.0, math.pi)


def kkt(model, a, q):
    return float(np.linalg.norm(geo.q_of_a(model, a) - q)) + abs(geo.phi(model, a) - 1)


def test_phi_at_origin():
    assert geo.phi(m1, [0, 0]) == 1.0


def test_mean_direction_gives_origin():
    np.testing.assert_allclose(geo.a_of_q(m1, mean(m1)), 0, atol=1e-8)


def test_tangent_point_closed_form():
    # (1, 0): beta minimises phi(alpha, .) so e^beta = sqrt(2/3); alpha then solves phi = 1
    a = geo.a_of_q(m1, [1, 0])
    assert a[1] == pytest.approx(0.5 * math.log(2 / 3), abs=1e-10)
    s = 1 - 2 * math.sqrt(0.06)
    alpha = math.log((s + math.sqrt(s * s - 0.24)) / 0.6)
    assert a[0] == pytest.approx(alpha, abs=1e-10)
    assert geo.classify(m1, a) is geo.BoundaryClass.TANGENT


def test_left_direction_reference_value():
    np.testing.assert_allclose(geo.a_of_q(m1, [-1, 0]), [-0.48895, -0.20273], atol=1e-5)


@pytest.mark.parametrize("model", [m1, m2])
def test_kkt_on_grid(model):
    for q in upper_directions(50, seed=3):
        a = geo.a_of_q(model, q)
        assert kkt(model, a, q) < 1e-9


def test_beta_min_and_truncation():
    b0, lam = geo.beta_min(m1, [0.0])
    assert b0 == pytest.approx(0.5 * math.log(2 / 3), abs=1e-12)
    assert lam == pytest.approx(math.log(0.5 + 2 * math.sqrt(0.06)), abs=1e-12)
    vals = [geo.spectral_radius_truncated(m1, [0.0], K) for K in (1, 2, 5, 20, 100)]
    assert all(x <= y + 1e-12 for x, y in zip(vals, vals[1:]))
    assert vals[-1] <= lam + 1e-12


def test_boundary_point_for_alpha():
    a = geo.boundary_point_for_alpha(m1, [0.0])
    np.testing.assert_allclose(a, [0, 0], atol=1e-12)
    with pytest.raises(DomainError):
        geo.boundary_point_for_alpha(m1, [3.0])


def test_conjugate_point():
    np.testing.assert_allclose(geo.conjugate_point(m1, [0, 0]), [0, math.log(2 / 3)], atol=1e-12)


def test_classify_rejects_off_surface():
    with pytest.raises(DomainError):
        geo.classify(m1, [0.1, 0.1])
    with pytest.raises(DomainError):
        geo.classify(m1, [0, math.log(2 / 3)])


def test_legendre_at_zero_velocity():
    # (log phi)*(0) = -log min phi, and phi separates into two one-dimensional parts
    assert geo.log_phi_conjugate(m1, [0, 0]) == pytest.approx(-math.log(4 * math.sqrt(0.06)), abs=1e-10)


def test_legendre_outside_hull():
    with pytest.raises(DomainError):
        geo.legendre_point(m1, [1.5, 0])


@settings(max_examples=60, deadline=None)
@given(angles)
def test_a_of_q_maximises_support(theta):
    q = np.array([math.cos(theta), math.sin(theta)])
    a = geo.a_of_q(m2, q)
    assert kkt(m2, a, q) < 1e-8
    # any other boundary point lies on the same side of the supporting line
    for other in upper_directions(8, seed=int(theta * 1e6)):
        assert geo.a_of_q(m2, other) @ q <= a @ q + 1e-9


@settings(max_examples=60, deadline=None)
@given(st.floats(-0.8, 0.8), st.floats(-0.8, 0.8))
def test_conjugate_nonnegative_and_fenchel(vx, vy):
    try:
        a = geo.legendre_point(m1, [vx, vy])
    except DomainError:
        return
    val = geo.log_phi_conjugate(m1, [vx, vy])
    assert val >= -1e-12
    # Fenchel-Young with equality at the maximiser
    assert val == pytest.approx(a @ [vx, vy] - math.log(geo.phi(m1, a)), abs=1e-9)
    probe = np.array([0.1, -0.2])
    assert val >= probe @ [vx, vy] - math.log(geo.phi(m1, probe)) - 1e-12


@settings(max_examples=40, deadline=None)
@given(st.floats(-1.0, 1.0), st.floats(-1.0, 1.0), st.floats(0.0, 1.0))
def test_phi_convex(x, y, t):
    a, b = np.array([x, y]), np.array([y, -x])
    mid = t * a + (1 - t) * b
    assert geo.phi(m2, mid) <= t * geo.phi(m2, a) + (1 - t) * geo.phi(m2, b) + 1e-12


@settings(max_examples=30, deadline=None)
@given(angles)
def test_identity_44(theta):
    q = np.array([math.cos(theta), math.sin(theta)])
    a = geo.a_of_q(m1, q)
    g = geo.grad_phi(m1, a)
    assert geo.log_phi_conjugate(m1, g) == pytest.approx(np.linalg.norm(g) * (a @ q), abs=1e-8)
