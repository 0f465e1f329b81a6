import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from deltashock.core import FieldState, ValidationError, make_grid, sample, total_mass
from deltashock.flux import FluxSpec, IrregularizationSpec
from deltashock.solver import SchemeConfig, spatial_rhs
from deltashock.systems import (SystemSpec, derivative_consistency, derivative_seeded_state, run_system,
                                system_rhs)


def pair(u, v):
    return FieldState(make_grid(1.0, len(u)), np.vstack([u, v]))


@pytest.mark.parametrize("kind", ["tans", "tans-viscous", "keyfitz"])
def test_constant_state_has_zero_rhs(kind):
    s = pair(np.full(16, 0.4), np.full(16, -1.3))
    assert np.all(system_rhs(s, SystemSpec(kind, eta=1e-3)) == 0)


def test_tans_with_zero_v_matches_square_law():
    g = make_grid(1.0, 64)
    u = sample(lambda x: np.sin(2 * np.pi * x) + 0.2, g)
    r = system_rhs(pair(u.u, np.zeros(64)), SystemSpec("tans"))
    np.testing.assert_array_equal(r[0], spatial_rhs(u, FluxSpec("square"), IrregularizationSpec())[0])
    assert np.all(r[1] == 0)


@given(arrays(float, (2, 48), elements=st.floats(-2, 2)), st.sampled_from(["tans", "keyfitz"]))
def test_system_conserves_each_component(w, kind):
    s = FieldState(make_grid(1.0, 48), w)
    r = system_rhs(s, SystemSpec(kind))
    assert np.all(np.abs(r.sum(axis=1)) * s.grid.dx <= 1e-12 * (1 + np.abs(w).max() ** 3))


def test_generalized_needs_both_functions():
    with pytest.raises(ValidationError):
        SystemSpec("generalized", flux=FluxSpec("hopf"))
    spec = SystemSpec("generalized", flux=FluxSpec("hopf"), g=np.arctan)
    s = pair(np.linspace(-1, 1, 16), np.ones(16))
    assert system_rhs(s, spec).shape == (2, 16)


def test_system_rhs_rejects_scalar():
    with pytest.raises(ValidationError):
        system_rhs(sample(lambda x: x, make_grid(1.0, 8)), SystemSpec())


def test_run_system_conserves_mass():
    g = make_grid(1.0, 128)
    s = derivative_seeded_state(sample(lambda x: np.sin(2 * np.pi * x) + 0.3, g))
    traj = run_system(s, SystemSpec("tans-viscous", 1e-3), SchemeConfig(), 0.3, stride=50)
    m0, m1 = total_mass(s), total_mass(traj.final)
    np.testing.assert_allclose(m1, m0, atol=1e-13 * 128)


def test_derivative_consistency_frame0_and_smooth_phase():
    g = make_grid(1.0, 500)
    s = derivative_seeded_state(sample(lambda x: np.sin(2 * np.pi * x), g))
    spec = SystemSpec("tans-viscous", 1e-4, flux=FluxSpec("hopf"))
    traj = run_system(s, spec, SchemeConfig(), 0.12, stride=0, frame_times=[0.04, 0.08])
    dev = derivative_consistency(traj)
    assert dev[0] == 0.0
    assert np.all(dev <= 0.05)


def test_derivative_consistency_constant_guard():
    s = derivative_seeded_state(sample(lambda x: 1.0, make_grid(1.0, 8)))
    traj = run_system(s, SystemSpec("tans"), SchemeConfig(), 0.0)
    with pytest.raises(ValidationError):
        derivative_consistency(traj)


def test_keyfitz_runs_stably():
    g = make_grid(1.0, 200)
    s = pair(np.where(g.centers < 0.5, 1.0, -1.0), np.zeros(200))
    traj = run_system(s, SystemSpec("keyfitz"), SchemeConfig(), 0.2, stride=0)
    assert not traj.aborted and np.all(np.isfinite(traj.final.values))
