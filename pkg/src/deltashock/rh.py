"""Rankine-Hugoniot balances with and without a growing point mass.

Across a defect moving at speed ``sigma`` with a point mass ``m`` riding on it,

    F(u_l) - F(u_r) = sigma * (u_l - u_r) + dm/dt

componentwise. With ``dm/dt = 0`` a vector law over-determines the single
unknown ``sigma``; the balance then fails unless the states are degenerate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .core import ValidationError
from .flux import FluxSpec

AGREE_RTOL = 1e-12


class NoShockError(ValidationError):
    """Left and right states coincide; there is no discontinuity."""


@dataclass(frozen=True)
class RiemannData:
    u_left: np.ndarray
    u_right: np.ndarray

    def __post_init__(self):
        ul = np.atleast_1d(np.asarray(self.u_left, dtype=float))
        ur = np.atleast_1d(np.asarray(self.u_right, dtype=float))
        if ul.shape != ur.shape:
            raise ValidationError("left and right states have different sizes")
        if not (np.all(np.isfinite(ul)) and np.all(np.isfinite(ur))):
            raise ValidationError("Riemann states must be finite")
        object.__setattr__(self, "u_left", ul)
        object.__setattr__(self, "u_right", ur)

    @property
    def components(self) -> int:
        return self.u_left.size


@dataclass
class ShockBalance:
    speed: Optional[float]
    residuals: np.ndarray
    delta_mass_rate: np.ndarray
    component_speeds: list = field(default_factory=list)
    overdetermined: bool = False

    def to_dict(self) -> dict:
        return {
            "speed": self.speed,
            "overdetermined": self.overdetermined,
            "component_speeds": self.component_speeds,
            "residuals": [None if np.isnan(r) else float(r) for r in self.residuals],
            "delta_mass_rate": [None if np.isnan(r) else float(r) for r in self.delta_mass_rate],
        }


# vector fluxes acting on arrays of shape (m,) or (m, n)

def tans_flux(w):
    u, v = w
    return np.array([u * u, u * v])


def keyfitz_flux(w):
    u, v = w
    return np.array([u * u - v, u ** 3 / 3.0 - u])


def scalar_flux(flux: FluxSpec) -> Callable:
    return lambda w: np.atleast_1d(flux(np.asarray(w)[0]))


NAMED_FLUXES = {
    "hopf": scalar_flux(FluxSpec("hopf")),
    "square": scalar_flux(FluxSpec("square")),
    "tans": tans_flux,
    "keyfitz": keyfitz_flux,
}


def _as_vector_flux(flux) -> Callable:
    if isinstance(flux, FluxSpec):
        return scalar_flux(flux)
    if isinstance(flux, str):
        try:
            return NAMED_FLUXES[flux]
        except KeyError:
            raise ValidationError(f"unknown flux {flux!r}; choose from {sorted(NAMED_FLUXES)}") from None
    return lambda w: np.atleast_1d(np.asarray(flux(w), dtype=float))


def flux_jump(flux, data: RiemannData) -> np.ndarray:
    F = _as_vector_flux(flux)
    return F(data.u_left) - F(data.u_right)


def classical_shock_speed(flux, data: RiemannData) -> ShockBalance:
    """Solve ``F(u_l) - F(u_r) = sigma (u_l - u_r)`` for a common ``sigma``.

    Components with zero jump and zero flux jump are compatible with any speed
    and do not vote. A zero jump carrying a nonzero flux jump admits no speed.
    """
    jump = data.u_left - data.u_right
    if np.all(jump == 0):
        raise NoShockError("u_left equals u_right in every component")
    dF = flux_jump(flux, data)
    speeds = []
    consistent = True
    for dFi, ji in zip(dF, jump):
        if ji == 0:
            if dFi != 0:
                consistent = False
                speeds.append(None)
            else:
                speeds.append(float("nan"))
            continue
        speeds.append(float(dFi / ji))
    voting = [s for s in speeds if s is not None and not np.isnan(s)]
    ref = voting[0] if voting else None
    if consistent and ref is not None:
        scale = max(abs(s) for s in voting)
        consistent = all(abs(s - ref) <= AGREE_RTOL * max(scale, 1e-300) for s in voting)
    component_speeds = [None if (s is None or np.isnan(s)) else s for s in speeds]
    if not consistent:
        nan = np.full(data.components, np.nan)
        return ShockBalance(None, nan, nan, component_speeds, overdetermined=True)
    sigma = float(np.mean(voting))
    res = dF - sigma * jump
    return ShockBalance(sigma, res, res.copy(), component_speeds)


def delta_mass_rate(flux, data: RiemannData, sigma: float) -> np.ndarray:
    """``F(u_l) - F(u_r) - sigma (u_l - u_r)``: growth rate of the point mass."""
    return flux_jump(flux, data) - sigma * (data.u_left - data.u_right)


def balance_at(flux, data: RiemannData, sigma: float) -> ShockBalance:
    """Balance for a prescribed defect speed (``sigma = 0`` is stationarity)."""
    rate = delta_mass_rate(flux, data, sigma)
    try:
        classical = classical_shock_speed(flux, data)
        comp = classical.component_speeds
        over = classical.overdetermined
    except NoShockError:
        comp, over = [], False
    return ShockBalance(float(sigma), rate, rate.copy(), comp, over)


def tans_degeneracy(data: RiemannData, rtol: float = AGREE_RTOL) -> bool:
    """True when ``u_l v_r == u_r v_l``, the case where one speed fits both equations."""
    if data.components != 2:
        raise ValidationError("tans_degeneracy needs (u, v) pairs")
    (ul, vl), (ur, vr) = data.u_left, data.u_right
    a, b = ul * vr, ur * vl
    return bool(abs(a - b) <= rtol * max(abs(a), abs(b)))


@dataclass(frozen=True)
class Atom:
    position: float
    mass: np.ndarray

    def to_dict(self) -> dict:
        m = np.atleast_1d(self.mass)
        return {"position": self.position, "mass": [float(v) for v in m]}


@dataclass(frozen=True)
class PiecewiseConstant:
    """Values ``values[k]`` on the k-th interval cut by ``breaks`` (closed on the left piece)."""

    breaks: tuple
    values: tuple

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(np.asarray(self.breaks), x, side="left")
        return np.asarray(self.values, dtype=float)[idx]

    def to_dict(self) -> dict:
        return {"breaks": list(self.breaks), "values": list(self.values)}


@dataclass(frozen=True)
class AtomicMeasure1D:
    """Regular density plus point masses: ``u = regular(x) + sum m_k delta(x - x_k)``."""

    regular: PiecewiseConstant
    atoms: tuple

    def integrate(self, a: float, b: float, phi: Callable = None, n: int = 20001) -> float:
        """``int_a^b phi du`` (phi defaults to 1); atoms count when ``a <= x_k <= b``."""
        phi = phi or (lambda x: np.ones_like(x))
        xs = np.linspace(a, b, n)
        ys = self.regular(xs) * phi(xs)
        total = float(np.sum(0.5 * (ys[1:] + ys[:-1]) * np.diff(xs)))
        for atom in self.atoms:
            if a <= atom.position <= b:
                total += float(np.atleast_1d(atom.mass)[0] * phi(np.array([atom.position]))[0])
        return total

    def to_dict(self) -> dict:
        return {"regular": self.regular.to_dict(), "atoms": [a.to_dict() for a in self.atoms]}


def stationary_riemann_solution(t: float, flux="hopf", left: float = 1.0,
                                right: float = 0.0, position: float = 0.0) -> AtomicMeasure1D:
    """Step data held fixed with a point mass at the jump growing at the full flux imbalance.

    For the Hopf flux with ``(1, 0)`` the mass is exactly ``t / 2``.
    """
    if not t >= 0:
        raise ValidationError(f"time must be >= 0, got {t}")
    rate = delta_mass_rate(flux, RiemannData([left], [right]), 0.0)
    regular = PiecewiseConstant((position,), (left, right))
    return AtomicMeasure1D(regular, (Atom(position, rate * t),))
