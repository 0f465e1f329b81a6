"""Conservative upwind scheme, Fourier-space regularization and time stepping.

Face flux between cells i and i+1::

    F_i = F(u_up) * f(eps, (u_{i+1} - u_i) / dx)

where ``u_up`` is picked by the sign of the face speed (``u_i + u_{i+1}`` for
the quadratic fluxes) but the slope inside ``f`` is the plain forward
difference. Cells update as ``du_i/dt = -(F_i - F_{i-1}) / dx``.

The regularization ``eta d^k u/dx^k`` is split off and advanced exactly per
Fourier mode, so it never limits the time step and never changes the mean.
"""

from __future__ import annotations

import math
import time as _time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .core import FieldState, Grid1D, NonFiniteError, ValidationError
from .flux import FluxSpec, IrregularizationSpec, RegularizationSpec

SPEED_FLOOR = 1e-12


@dataclass(frozen=True)
class SchemeConfig:
    cfl: float = 0.4
    dt: Optional[float] = None
    abort_on_nonfinite: bool = True

    def __post_init__(self):
        if not (0 < self.cfl <= 1):
            raise ValidationError(f"cfl must lie in (0, 1], got {self.cfl}")
        if self.dt is not None and not self.dt > 0:
            raise ValidationError(f"fixed dt must be positive, got {self.dt}")

    @property
    def dt_policy(self) -> str:
        return "cfl-adaptive" if self.dt is None else "fixed"

    def time_step(self, dx: float, speed: float) -> float:
        if self.dt is not None:
            return self.dt
        return self.cfl * dx / max(speed, SPEED_FLOOR)


@dataclass(frozen=True)
class SpectralFilter:
    eta: float = 0.0
    order: int = 0

    @classmethod
    def from_regularization(cls, reg: RegularizationSpec) -> "SpectralFilter":
        return cls(reg.eta, reg.order)

    @property
    def active(self) -> bool:
        return self.eta > 0 and self.order > 0

    def wavenumbers(self, grid: Grid1D) -> np.ndarray:
        return 2 * np.pi * np.fft.rfftfreq(grid.cells, grid.dx)

    def multipliers(self, grid: Grid1D, dt: float) -> np.ndarray:
        q = self.wavenumbers(grid)
        if not self.active:
            return np.ones(q.shape, dtype=complex)
        k = self.order
        if k % 2 == 0:
            # damping for both k=2 and k=4 (k=4 taken as hyperdiffusion)
            return np.exp(-self.eta * q ** k * dt).astype(complex)
        if grid.cells % 2 == 0:
            # odd derivatives have no real Nyquist representation
            q = q.copy()
            q[-1] = 0.0
        return np.exp(-1j * self.eta * q ** 3 * dt)


def numerical_flux(u_i, u_ip1, du, dx: float, flux: FluxSpec, irr: IrregularizationSpec):
    """Upwind face flux; ties (zero face speed) take the mean of both sides."""
    u_i = np.asarray(u_i, dtype=float)
    u_ip1 = np.asarray(u_ip1, dtype=float)
    du = np.asarray(du, dtype=float)
    if not (np.all(np.isfinite(u_i)) and np.all(np.isfinite(u_ip1)) and np.all(np.isfinite(du))):
        raise NonFiniteError("non-finite input to numerical_flux")
    out = _upwind_flux(u_i, u_ip1, du, dx, flux, irr)
    return float(out) if out.ndim == 0 else out


def _upwind_flux(u_i, u_ip1, du, dx, flux, irr):
    c = flux.upwind_speed(u_i, u_ip1)
    fl = flux(u_i)
    fr = flux(u_ip1)
    up = np.where(c > 0, fl, np.where(c < 0, fr, 0.5 * (fl + fr)))
    return up * irr.factor(du / dx)


def face_fluxes(u: np.ndarray, dx: float, flux: FluxSpec, irr: IrregularizationSpec) -> np.ndarray:
    """``F_i`` on the face between cell i and i+1 (periodic)."""
    up = np.roll(u, -1)
    return _upwind_flux(u, up, up - u, dx, flux, irr)


def _rhs_values(u: np.ndarray, dx: float, flux: FluxSpec, irr: IrregularizationSpec) -> np.ndarray:
    F = face_fluxes(u, dx, flux, irr)
    return -(F - np.roll(F, 1)) / dx


def spatial_rhs(state: FieldState, flux: FluxSpec, irr: IrregularizationSpec) -> np.ndarray:
    """Semi-discrete time derivative of a scalar periodic state, shape ``(1, n)``."""
    if state.components != 1:
        raise ValidationError("spatial_rhs expects a scalar state; use systems.system_rhs")
    if not state.grid.periodic:
        raise ValidationError("only periodic grids are supported")
    return _rhs_values(state.u, state.grid.dx, flux, irr)[None, :]


def frozen_boundary_rhs(left: float, right: float, dx: float, flux: FluxSpec,
                        irr: IrregularizationSpec) -> Callable[[np.ndarray], np.ndarray]:
    """Non-periodic rhs for a window whose single ghost cells stay at ``left``/``right``.

    Meant for probing exact profiles (such as the cosh) that cannot be made periodic.
    """
    def rhs(w):
        u = np.concatenate([[left], w[0], [right]])
        F = _upwind_flux(u[:-1], u[1:], np.diff(u), dx, flux, irr)
        return (-(F[1:] - F[:-1]) / dx)[None, :]
    return rhs


def _filter_values(values: np.ndarray, mult: np.ndarray, rows=None) -> np.ndarray:
    out = values.copy()
    n = values.shape[1]
    for j in (range(values.shape[0]) if rows is None else rows):
        v = values[j]
        w = np.fft.irfft(np.fft.rfft(v) * mult, n)
        # zero mode carries multiplier 1; remove FFT round-off in the mean
        w += v.mean() - w.mean()
        out[j] = w
    return out


def apply_spectral_regularization(state: FieldState, filt: SpectralFilter, dt: float,
                                  components: Optional[Sequence[int]] = None) -> FieldState:
    """Advance ``u_t = eta d^k u`` by ``dt`` exactly on the discrete Fourier modes."""
    if not filt.active:
        return state
    mult = filt.multipliers(state.grid, dt)
    return state.evolve(_filter_values(state.values, mult, components), state.time)


def ssprk3(v: np.ndarray, dt: float, rhs: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """One step of the three-stage, third-order SSP Runge-Kutta method."""
    v1 = v + dt * rhs(v)
    v2 = 0.75 * v + 0.25 * (v1 + dt * rhs(v1))
    return v / 3.0 + (2.0 / 3.0) * (v2 + dt * rhs(v2))


@dataclass
class Trajectory:
    frames: list = field(default_factory=list)
    steps: int = 0
    dt_min: float = math.inf
    dt_max: float = 0.0
    dt_sum: float = 0.0
    aborted: bool = False
    abort_reason: str = ""
    wall_seconds: float = 0.0

    @property
    def times(self) -> np.ndarray:
        return np.array([f.time for f in self.frames])

    @property
    def final(self) -> FieldState:
        return self.frames[-1]

    def record_dt(self, dt: float):
        self.steps += 1
        self.dt_min = min(self.dt_min, dt)
        self.dt_max = max(self.dt_max, dt)
        self.dt_sum += dt

    def summary(self) -> dict:
        return {
            "steps": self.steps,
            "frames": len(self.frames),
            "dt_min": self.dt_min if self.steps else None,
            "dt_max": self.dt_max if self.steps else None,
            "dt_mean": self.dt_sum / self.steps if self.steps else None,
            "aborted": self.aborted,
            "abort_reason": self.abort_reason,
            "wall_seconds": self.wall_seconds,
        }


class SimulationAborted(RuntimeError):
    """Raised when a run hits non-finite values; carries the partial trajectory."""

    def __init__(self, message: str, trajectory: Trajectory):
        super().__init__(message)
        self.trajectory = trajectory


def integrate(initial: FieldState, rhs: Callable[[np.ndarray], np.ndarray],
              speed: Callable[[np.ndarray], float], filt: SpectralFilter,
              config: SchemeConfig, t_end: float, observers: Sequence[Callable] = (),
              stride: int = 1, frame_times: Sequence[float] = (),
              filter_components: Optional[Sequence[int]] = None,
              keep_frames: bool = True) -> Trajectory:
    """Operator-split driver shared by the scalar and system solvers.

    Frames are recorded at ``initial``, every ``stride`` steps (``stride <= 0``
    disables this), at each of ``frame_times`` (the step is shortened to land
    on them exactly) and at ``t_end``. Observers see every recorded frame.
    """
    if t_end < initial.time:
        raise ValidationError(f"t_end={t_end} precedes initial time {initial.time}")
    traj = Trajectory()
    clock = _time.perf_counter()
    grid = initial.grid
    dx = grid.dx
    targets = sorted(t for t in frame_times if initial.time < t < t_end)

    def emit(state):
        if keep_frames:
            traj.frames.append(state)
        else:
            traj.frames[:] = [state]
        for obs in observers:
            obs(state)

    emit(initial)
    v = initial.values
    t = initial.time
    cached_mult = (None, None)
    while t < t_end and not math.isclose(t, t_end, rel_tol=0, abs_tol=1e-14 * max(1.0, abs(t_end))):
        dt = config.time_step(dx, speed(v))
        stop = targets[0] if targets else t_end
        hit = False
        if t + dt >= stop:
            dt = stop - t
            hit = True
        # overflow is caught by the finiteness check below
        with np.errstate(over="ignore", invalid="ignore"):
            v_new = ssprk3(v, dt, rhs)
            if filt.active:
                if cached_mult[0] != dt:
                    cached_mult = (dt, filt.multipliers(grid, dt))
                v_new = _filter_values(v_new, cached_mult[1], filter_components)
        if not np.all(np.isfinite(v_new)):
            last_good = initial.evolve(v, t)
            traj.aborted = True
            traj.abort_reason = f"non-finite values after step {traj.steps + 1} (t={t + dt:.6g})"
            traj.wall_seconds = _time.perf_counter() - clock
            if traj.frames[-1].time != t:
                traj.frames.append(last_good)
            if config.abort_on_nonfinite:
                err = SimulationAborted(traj.abort_reason, traj)
                err.last_good = last_good
                raise err
            return traj
        t = stop if hit else t + dt
        v = v_new
        traj.record_dt(dt)
        record = hit or (stride > 0 and traj.steps % stride == 0)
        if hit and targets and stop == targets[0]:
            targets.pop(0)
        if record:
            emit(initial.evolve(v, t))
    if traj.frames[-1].time != t:
        emit(initial.evolve(v, t))
    traj.wall_seconds = _time.perf_counter() - clock
    return traj


def step(state: FieldState, flux: FluxSpec, irr: IrregularizationSpec,
         filt: SpectralFilter, config: SchemeConfig) -> FieldState:
    """One SSP-RK3 step on the upwind scheme, then the exact filter over the same dt."""
    if state.components != 1:
        raise ValidationError("step expects a scalar state")
    dx = state.grid.dx
    dt = config.time_step(dx, flux.max_speed(state.u))
    with np.errstate(over="ignore", invalid="ignore"):
        v = ssprk3(state.values, dt, lambda w: _rhs_values(w[0], dx, flux, irr)[None, :])
        if filt.active:
            v = _filter_values(v, filt.multipliers(state.grid, dt))
    if not np.all(np.isfinite(v)):
        raise NonFiniteError(f"non-finite values after step from t={state.time}", last_good=state)
    return state.evolve(v, state.time + dt)


def run(initial: FieldState, flux: FluxSpec, irr: IrregularizationSpec, filt: SpectralFilter,
        config: SchemeConfig, t_end: float, observers: Sequence[Callable] = (),
        stride: int = 1, frame_times: Sequence[float] = (), keep_frames: bool = True) -> Trajectory:
    """Integrate a scalar law from ``initial`` to ``t_end``.

    Raises :class:`SimulationAborted` (with the partial trajectory) on blowup
    when ``config.abort_on_nonfinite`` is set.
    """
    if initial.components != 1:
        raise ValidationError("run expects a scalar state; see systems.run_system")
    dx = initial.grid.dx

    def rhs(w):
        return _rhs_values(w[0], dx, flux, irr)[None, :]

    return integrate(initial, rhs, lambda w: flux.max_speed(w[0]), filt, config, t_end,
                     observers=observers, stride=stride, frame_times=frame_times,
                     keep_frames=keep_frames)
