import numpy as np
import pytest

from skewflow.evolution import (
    Trajectory,
    adjoint_generator,
    adjoint_trajectory,
    evolve_cayley,
    evolve_exact,
)
from skewflow.operators import RestrictedOperator, seam_extension
from skewflow.oracles import gaussian_profile, minimal_derivative_operator
from skewflow.spaces import Space


def rotation():
    m = np.array([[0.0, -1.0], [1.0, 0.0]])
    return RestrictedOperator(space=Space.euclidean(2), action=m, domain=None)


def wrapped_generator(n=64, theta=1.0):
    op = minimal_derivative_operator(n)
    gen = adjoint_generator(seam_extension(op, theta))
    u0 = gaussian_profile(op.meta["grid"])
    return op, gen, u0 / op.space.norm(u0)


# ---------------------------------------------------------------------------
# Trajectory container
# ---------------------------------------------------------------------------

def test_trajectory_requires_zero_start():
    s = Space.euclidean(2)
    with pytest.raises(ValueError):
        Trajectory(times=np.array([0.5, 1.0]), states=np.zeros((2, 2)), space=s)


def test_trajectory_requires_increasing_times():
    s = Space.euclidean(2)
    with pytest.raises(ValueError):
        Trajectory(times=np.array([0.0, 1.0, 1.0]),
                   states=np.zeros((3, 2)), space=s)


def test_trajectory_sample_interpolates_and_clamps():
    s = Space.euclidean(1)
    tr = Trajectory(times=np.array([0.0, 1.0]),
                    states=np.array([[0.0], [2.0]]), space=s)
    assert tr.sample(0.5)[0] == pytest.approx(1.0)
    assert tr.sample(5.0)[0] == pytest.approx(2.0)  # clamped at the end
    got = tr.sample(np.array([0.25, 0.75]))
    np.testing.assert_allclose(got[:, 0], [0.5, 1.5])


# ---------------------------------------------------------------------------
# exact flow
# ---------------------------------------------------------------------------

def test_exact_rotation_matches_trig():
    t = np.array([0.3, 1.2, np.pi])
    traj = evolve_exact(rotation(), np.array([1.0, 0.0]), t)
    for k, tk in enumerate(traj.times):
        np.testing.assert_allclose(traj.states[k],
                                   [np.cos(tk), np.sin(tk)], atol=1e-12)
    assert traj.stepper_meta["schur_rotation"] is True


def test_exact_flow_keeps_norm_for_skew_generators():
    _, gen, u0 = wrapped_generator()
    traj = evolve_exact(gen, u0, [0.1, 1.0, 10.0])
    np.testing.assert_allclose(traj.norms(), 1.0, atol=1e-10)


def test_exact_flow_handles_nonskew_by_expm():
    b = RestrictedOperator(space=Space.euclidean(2),
                           action=np.array([[-1.0, 0.0], [0.0, -2.0]]),
                           domain=None)
    traj = evolve_exact(b, np.array([1.0, 1.0]), [1.0])
    np.testing.assert_allclose(traj.states[-1],
                               [np.exp(-1), np.exp(-2)], atol=1e-12)
    assert traj.stepper_meta["schur_rotation"] is False


def test_exact_flow_requires_full_domain():
    op = minimal_derivative_operator(16)
    with pytest.raises(ValueError, match="extend the operator first"):
        evolve_exact(op, np.ones(16), [1.0])


# ---------------------------------------------------------------------------
# trapezoidal stepping
# ---------------------------------------------------------------------------

def test_cayley_flow_is_norm_exact_for_skew():
    _, gen, u0 = wrapped_generator()
    traj = evolve_cayley(gen, u0, 1e-2, 500)
    norms = traj.norms()
    assert np.max(np.abs(norms - 1.0)) < 1e-12


def test_cayley_second_order_in_time():
    # Richardson: halving dt should cut the endpoint error by about 4
    _, gen, u0 = wrapped_generator(n=32)
    ref = evolve_exact(gen, u0, [1.0]).final
    errs = []
    for nsteps in (100, 200):
        got = evolve_cayley(gen, u0, 1.0 / nsteps, nsteps).final
        errs.append(np.linalg.norm(got - ref))
    assert 3.3 < errs[0] / errs[1] < 4.7


def test_cayley_shapes_and_meta():
    _, gen, u0 = wrapped_generator(n=16)
    traj = evolve_cayley(gen, u0, 0.1, 7)
    assert traj.states.shape == (8, 16)
    assert traj.times[-1] == pytest.approx(0.7)
    assert traj.stepper_meta["method"] == "cayley"
    assert traj.stepper_meta["dt"] == pytest.approx(0.1)


def test_cayley_validates_inputs():
    _, gen, u0 = wrapped_generator(n=16)
    with pytest.raises(ValueError):
        evolve_cayley(gen, u0, -0.1, 10)
    with pytest.raises(ValueError):
        evolve_cayley(gen, u0, 0.1, 0)
    op = minimal_derivative_operator(16)
    with pytest.raises(ValueError, match="extend the operator first"):
        evolve_cayley(op, u0, 0.1, 10)


def test_cayley_contracts_for_dissipative_generators():
    op = minimal_derivative_operator(32)
    ext = seam_extension(op, 0.0)  # fully absorbing seam
    gen = RestrictedOperator(space=ext.space, action=-ext.dense_action(),
                             domain=None)
    u0 = np.zeros(32)
    u0[0] = 1.0 / np.sqrt(op.space.weights[0])  # mass right on the seam
    traj = evolve_cayley(gen, u0, 1e-2, 200)
    norms = traj.norms()
    assert np.all(np.diff(norms) <= 1e-12)
    assert norms[-1] < 0.9 * norms[0]


# ---------------------------------------------------------------------------
# adjoint pairing
# ---------------------------------------------------------------------------

def test_adjoint_generator_negates_skew_actions():
    op = minimal_derivative_operator(32)
    ext = seam_extension(op, 1.0)
    gen = adjoint_generator(ext)
    np.testing.assert_allclose(gen.dense_action(), -ext.dense_action(),
                               atol=1e-13)


def test_adjoint_generator_uses_the_weights():
    w = np.array([1.0, 4.0])
    b = np.array([[0.0, 1.0], [0.5, 0.0]])
    op = RestrictedOperator(space=Space(dim=2, weights=w), action=b,
                            domain=None)
    adj = adjoint_generator(op).dense_action()
    # (W^{-1} B^T W)_{01} = w1/w0 * B_{10}
    assert adj[0, 1] == pytest.approx(4.0 * 0.5 / 1.0)
    assert adj[1, 0] == pytest.approx(1.0 / 4.0)


def test_adjoint_trajectory_matches_manual_loop():
    op = minimal_derivative_operator(16)
    ext = seam_extension(op, 1.0)
    u0 = gaussian_profile(op.meta["grid"])
    a = adjoint_trajectory(ext, u0, 1e-2, 50)
    b = evolve_cayley(adjoint_generator(ext), u0, 1e-2, 50)
    np.testing.assert_allclose(a.states, b.states, atol=1e-13)
