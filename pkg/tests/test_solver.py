import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from deltashock.core import FieldState, NonFiniteError, make_grid, sample, total_mass
from deltashock.flux import FluxSpec, IrregularizationSpec, RegularizationSpec
from deltashock.solver import (SchemeConfig, SimulationAborted, SpectralFilter,
                               apply_spectral_regularization, numerical_flux, run, spatial_rhs, step)

HOPF = FluxSpec("hopf")
NONE = IrregularizationSpec()


def test_numerical_flux_examples():
    assert numerical_flux(1.0, 1.0, 0.0, 0.01, HOPF, NONE) == 0.5
    assert numerical_flux(-1.0, -3.0, -2.0, 0.01, HOPF, NONE) == 4.5
    # f(1e-4, -100) = 1/(1 + 1e-4 * 1e4) = 1/2
    irr = IrregularizationSpec("rational", 1e-4)
    assert numerical_flux(1.0, 0.0, -1.0, 0.01, HOPF, irr) == pytest.approx(0.25, rel=1e-15)


def test_numerical_flux_tie_takes_mean():
    irr = IrregularizationSpec("rational", 1e-4)
    f = 1.0 / (1.0 + 1e-4 * (2 / 0.01) ** 2)
    assert numerical_flux(1.0, -1.0, -2.0, 0.01, HOPF, irr) == pytest.approx(0.5 * f, rel=1e-15)
    assert numerical_flux(2.0, -2.0, -4.0, 0.5, FluxSpec("square"), NONE) == 4.0


def test_numerical_flux_rejects_nan():
    with pytest.raises(NonFiniteError):
        numerical_flux(np.nan, 1.0, 0.0, 0.1, HOPF, NONE)


@given(u=st.floats(-1e3, 1e3), eps=st.floats(0, 1), fam=st.sampled_from(["none", "rational", "exponential"]))
def test_upwind_consistency(u, eps, fam):
    assert numerical_flux(u, u, 0.0, 0.01, HOPF, IrregularizationSpec(fam, eps)) == HOPF(u)


def test_rhs_constant_state_is_zero():
    s = sample(lambda x: 0.7, make_grid(1.0, 32))
    r = spatial_rhs(s, HOPF, IrregularizationSpec("rational", 1e-3))
    assert r.shape == (1, 32) and np.all(r == 0)


def test_rhs_first_order_convergence():
    errs = []
    for n in (200, 400, 800, 1600):
        g = make_grid(1.0, n)
        s = sample(lambda x: np.sin(2 * np.pi * x), g)
        exact = -np.sin(2 * np.pi * g.centers) * 2 * np.pi * np.cos(2 * np.pi * g.centers)
        errs.append(np.max(np.abs(spatial_rhs(s, HOPF, NONE)[0] - exact)))
    for a, b in zip(errs, errs[1:]):
        assert 0.5 * 0.7 <= b / a <= 0.5 * 1.3


@given(arrays(float, st.integers(4, 128), elements=st.floats(-2, 2)), st.floats(0, 1e-2))
def test_rhs_telescopes(u, eps):
    s = FieldState(make_grid(1.0, u.size), u)
    r = spatial_rhs(s, HOPF, IrregularizationSpec("rational", eps))
    assert abs(r.sum()) * s.grid.dx <= 1e-12 * (1 + np.abs(u).max() ** 2)


def test_spectral_identity_and_heat_factor():
    g = make_grid(1.0, 128)
    s = sample(lambda x: np.sin(2 * np.pi * x), g)
    same = apply_spectral_regularization(s, SpectralFilter(0.0, 2), 0.1)
    np.testing.assert_allclose(same.u, s.u, atol=1e-15)
    eta, dt = 1e-3, 0.5
    out = apply_spectral_regularization(s, SpectralFilter(eta, 2), dt)
    np.testing.assert_allclose(out.u, s.u * math.exp(-eta * (2 * math.pi) ** 2 * dt), atol=1e-13)


def test_hyperdiffusion_damps():
    g = make_grid(1.0, 64)
    s = sample(lambda x: np.sin(4 * np.pi * x), g)
    out = apply_spectral_regularization(s, SpectralFilter(1e-6, 4), 1.0)
    np.testing.assert_allclose(out.u, s.u * math.exp(-1e-6 * (4 * math.pi) ** 4), atol=1e-13)


@given(arrays(float, st.sampled_from([16, 33, 64]), elements=st.floats(-5, 5)),
       st.sampled_from([2, 3, 4]), st.floats(0, 1e-2), st.floats(0, 1))
def test_spectral_mean_preserved(u, k, eta, dt):
    s = FieldState(make_grid(1.0, u.size), u)
    out = apply_spectral_regularization(s, SpectralFilter(eta, k), dt)
    assert abs(out.u.mean() - u.mean()) <= 1e-15 * (1 + np.abs(u).max()) * 4


@given(arrays(float, st.sampled_from([16, 33, 64]), elements=st.floats(-5, 5)), st.floats(0, 1), st.floats(0, 10))
def test_dispersive_filter_preserves_l2(u, eta, dt):
    s = FieldState(make_grid(1.0, u.size), u)
    out = apply_spectral_regularization(s, SpectralFilter(eta, 3), dt)
    assert np.linalg.norm(out.u) == pytest.approx(np.linalg.norm(u), rel=1e-13, abs=1e-13)


def test_step_constant_state_unchanged():
    s = sample(lambda x: -0.3, make_grid(1.0, 16))
    out = step(s, HOPF, IrregularizationSpec("rational", 1e-3), SpectralFilter(1e-3, 2), SchemeConfig())
    np.testing.assert_allclose(out.u, s.u, atol=1e-15)
    assert out.time > 0


@given(arrays(float, st.integers(8, 128), elements=st.floats(-2, 2)),
       st.floats(0, 1e-3), st.sampled_from([0, 2, 3, 4]), st.floats(0, 1e-4))
def test_step_conserves_mass(u, eps, k, eta):
    s = FieldState(make_grid(1.0, u.size), u)
    filt = SpectralFilter.from_regularization(RegularizationSpec(eta, k))
    out = step(s, HOPF, IrregularizationSpec("rational", eps), filt, SchemeConfig())
    m0, m1 = total_mass(s)[0], total_mass(out)[0]
    assert abs(m1 - m0) <= 1e-13 * (1 + abs(m0))


def test_fixed_dt_policy():
    cfg = SchemeConfig(dt=1e-3)
    assert cfg.dt_policy == "fixed" and cfg.time_step(0.1, 1e9) == 1e-3
    assert SchemeConfig().time_step(0.01, 0.0) == pytest.approx(0.4 * 0.01 / 1e-12)


def test_burgers_shock_advances_at_half():
    g = make_grid(1.0, 400)
    s = sample(lambda x: np.where(x <= 0.3, 1.0, 0.0), g)

    def front(state):
        u = state.u
        i = np.nonzero((u[:-1] >= 0.5) & (u[1:] < 0.5))[0][-1]
        return g.centers[i] + g.dx * (u[i] - 0.5) / (u[i] - u[i + 1])

    traj = run(s, HOPF, NONE, SpectralFilter(1e-6, 2), SchemeConfig(), 0.4, frame_times=[0.1])
    t = traj.times
    x = [front(f) for f in traj.frames]
    speed = (x[-1] - x[1]) / (t[-1] - t[1])
    assert speed == pytest.approx(0.5, rel=0.02)


def test_run_zero_length():
    s = sample(lambda x: np.sin(2 * np.pi * x), make_grid(1.0, 16), t=0.25)
    traj = run(s, HOPF, NONE, SpectralFilter(), SchemeConfig(), 0.25)
    assert len(traj.frames) == 1 and traj.steps == 0


def test_run_records_requested_times_and_observers():
    seen = []
    s = sample(lambda x: np.sin(2 * np.pi * x), make_grid(1.0, 64))
    traj = run(s, HOPF, NONE, SpectralFilter(), SchemeConfig(), 0.1,
               observers=[lambda st_: seen.append(st_.time)], stride=0, frame_times=[0.05])
    assert list(traj.times) == [0.0, 0.05, 0.1] == seen


def test_blowup_aborts_with_last_good():
    g = make_grid(1.0, 8)
    s = FieldState(g, np.array([1e200, -1e200, 1e200, 0, 0, 0, 0, 0]))
    with pytest.raises(NonFiniteError) as err:
        step(s, HOPF, NONE, SpectralFilter(), SchemeConfig(dt=1.0))
    assert err.value.last_good is s
    with pytest.raises(SimulationAborted) as err2:
        run(s, HOPF, NONE, SpectralFilter(), SchemeConfig(dt=1.0), 5.0)
    traj = err2.value.trajectory
    assert traj.aborted and np.all(np.isfinite(traj.final.values))
    quiet = run(s, HOPF, NONE, SpectralFilter(), SchemeConfig(dt=1.0, abort_on_nonfinite=False), 5.0)
    assert quiet.aborted and "non-finite" in quiet.abort_reason
