"""Two-component laws that form delta shocks.

* ``tans``:          u_t + (u^2)_x = 0,          v_t + (u v)_x = 0
* ``tans-viscous``:  same, with ``eta u_xx`` on the u-equation only
* ``keyfitz``:       u_t + (u^2 - v)_x = 0,      v_t + (u^3/3 - u)_x = 0
* ``generalized``:   u_t + F(u)_x = 0,           v_t + (g(u) v)_x = 0

The u-equation reuses the scalar upwind flux. The v-equation is upwinded on
the transport speed ``g(u)``. Keyfitz-Kranzer is not of transport type and
uses a local Lax-Friedrichs flux instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .core import FieldState, ValidationError
from .flux import FluxSpec, IrregularizationSpec
from .solver import SchemeConfig, SpectralFilter, Trajectory, face_fluxes, integrate

SYSTEM_KINDS = ("tans", "tans-viscous", "keyfitz", "generalized")


def _identity(u):
    return u


@dataclass(frozen=True)
class SystemSpec:
    kind: str = "tans"
    eta: float = 0.0
    flux: Optional[FluxSpec] = None
    g: Optional[Callable] = None

    def __post_init__(self):
        if self.kind not in SYSTEM_KINDS:
            raise ValidationError(f"unknown system kind {self.kind!r}")
        if self.eta < 0:
            raise ValidationError("eta must be >= 0")
        if self.kind == "generalized" and (self.flux is None or self.g is None):
            raise ValidationError("generalized system needs both flux F and transport g")

    @property
    def u_flux(self) -> FluxSpec:
        return self.flux if self.flux is not None else FluxSpec("square")

    @property
    def transport(self) -> Callable:
        return self.g if self.g is not None else _identity

    @property
    def components(self) -> int:
        return 2

    def filter(self) -> SpectralFilter:
        if self.kind == "tans-viscous":
            return SpectralFilter(self.eta, 2)
        return SpectralFilter()

    def max_speed(self, w: np.ndarray) -> float:
        u = w[0]
        if self.kind == "keyfitz":
            return float(np.max(np.abs(u)) + 1.0)
        a = self.u_flux.max_speed(u)
        b = float(np.max(np.abs(self.transport(u))))
        return max(a, b)


_NO_IRR = IrregularizationSpec()


def _transport_flux(u, v, g):
    gu = g(u)
    gu_r, v_r = np.roll(gu, -1), np.roll(v, -1)
    c = gu + gu_r
    left, right = gu * v, gu_r * v_r
    return np.where(c > 0, left, np.where(c < 0, right, 0.5 * (left + right)))


def _keyfitz_fluxes(u, v):
    ur, vr = np.roll(u, -1), np.roll(v, -1)
    fl = np.array([u * u - v, u ** 3 / 3 - u])
    fr = np.array([ur * ur - vr, ur ** 3 / 3 - ur])
    a = np.maximum(np.abs(2 * u), np.abs(2 * ur)) + 1.0
    return 0.5 * (fl + fr) - 0.5 * a * np.array([ur - u, vr - v])


def system_fluxes(w: np.ndarray, dx: float, spec: SystemSpec) -> np.ndarray:
    u, v = w
    if spec.kind == "keyfitz":
        return _keyfitz_fluxes(u, v)
    return np.array([face_fluxes(u, dx, spec.u_flux, _NO_IRR), _transport_flux(u, v, spec.transport)])


def system_rhs(state: FieldState, spec: SystemSpec) -> np.ndarray:
    """Conservative semi-discrete derivative, shape ``(2, n)``.

    Viscosity of ``tans-viscous`` is not included here; the driver applies it
    as a Fourier-space sub-step on the u-component.
    """
    if state.components != 2:
        raise ValidationError("system_rhs expects a two-component state")
    return _rhs(state.values, state.grid.dx, spec)


def _rhs(w, dx, spec):
    F = system_fluxes(w, dx, spec)
    return -(F - np.roll(F, 1, axis=1)) / dx


def run_system(initial: FieldState, spec: SystemSpec, config: SchemeConfig, t_end: float,
               observers: Sequence[Callable] = (), stride: int = 1,
               frame_times: Sequence[float] = ()) -> Trajectory:
    if initial.components != 2:
        raise ValidationError("run_system expects a two-component state")
    dx = initial.grid.dx
    return integrate(initial, lambda w: _rhs(w, dx, spec), spec.max_speed, spec.filter(),
                     config, t_end, observers=observers, stride=stride,
                     frame_times=frame_times, filter_components=[0])


def circular_derivative(u: np.ndarray, dx: float) -> np.ndarray:
    """Centred periodic difference ``(u_{i+1} - u_{i-1}) / (2 dx)``."""
    return (np.roll(u, -1) - np.roll(u, 1)) / (2 * dx)


def derivative_seeded_state(u_state: FieldState) -> FieldState:
    """Two-component state ``(u, D_x u)`` from a scalar state."""
    u = u_state.u
    v = circular_derivative(u, u_state.grid.dx)
    return FieldState(u_state.grid, np.vstack([u, v]), u_state.time)


def derivative_consistency(trajectory: Trajectory) -> np.ndarray:
    """Per-frame ``||v - D_x u||_1 / ||D_x u||_1``."""
    out = []
    for frame in trajectory.frames:
        dxu = circular_derivative(frame.values[0], frame.grid.dx)
        denom = np.sum(np.abs(dxu))
        if denom == 0:
            raise ValidationError(f"u is constant at t={frame.time}; deviation undefined")
        out.append(np.sum(np.abs(frame.values[1] - dxu)) / denom)
    return np.array(out)
