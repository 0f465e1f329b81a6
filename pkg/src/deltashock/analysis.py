"""Diagnostics for irregularized Hopf solutions.

Zero crossings, windowed masses, spike detection, the stationary cosh
profile, the slope ODE at upward crossings and the piecewise
linear-plus-cosh asymptotic predictor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.ndimage import median_filter
from scipy.optimize import brentq

from .core import FieldState, ValidationError


class UnsupportedTopology(ValidationError):
    """The initial data does not have exactly one upward and one downward crossing."""


# -- zero crossings and windowed mass ----------------------------------------

@dataclass(frozen=True)
class ZeroCrossing:
    position: float
    direction: str  # "upward" or "downward"
    index: int      # left cell of the bracketing pair


def zero_crossings(state: FieldState) -> list[ZeroCrossing]:
    """Sign changes of ``u`` between neighbouring cells, periodic wrap included.

    Zero values count as positive. Positions are linearly interpolated.
    """
    u = state.u
    grid = state.grid
    up = np.roll(u, -1)
    pos = u >= 0
    idx = np.nonzero(pos != np.roll(pos, -1))[0]
    out = []
    for i in idx:
        frac = u[i] / (u[i] - up[i])
        x = grid.wrap(grid.centers[i] + frac * grid.dx)
        out.append(ZeroCrossing(float(x), "upward" if up[i] > u[i] else "downward", int(i)))
    return sorted(out, key=lambda c: c.position)


def _cumulative(state: FieldState, x) -> np.ndarray:
    """Integral of the piecewise-constant reconstruction from ``origin`` to ``x``."""
    g = state.grid
    u = state.u
    csum = np.concatenate([[0.0], np.cumsum(u) * g.dx])
    x = np.asarray(x, dtype=float)
    r = x - g.origin
    periods = np.floor(r / g.length)
    r = r - periods * g.length
    i = np.clip((r / g.dx).astype(int), 0, g.cells - 1)
    return periods * csum[-1] + csum[i] + (r - i * g.dx) * u[i]


def mass_between(state: FieldState, a: float, b: float) -> float:
    """``int_a^b u dx`` with partial cells weighted by overlap.

    ``b`` may run past the right end of the domain; the field is periodic.
    """
    if not a < b:
        raise ValidationError(f"mass_between needs a < b, got [{a}, {b}]")
    return float(_cumulative(state, b) - _cumulative(state, a))


def local_slope(state: FieldState, x0: float, inner: int = 4, outer: int = 64) -> float:
    """Least-squares slope of ``u`` over cells ``inner..outer`` cells away from ``x0``.

    The innermost cells are skipped: at a sonic point the upwind switch
    leaves a kink a few cells wide that would otherwise bias the fit.
    """
    g = state.grid
    d = (g.centers - x0 + g.length / 2) % g.length - g.length / 2
    sel = (np.abs(d) >= inner * g.dx) & (np.abs(d) <= outer * g.dx)
    if sel.sum() < 2:
        raise ValidationError("not enough cells for a slope fit")
    return float(np.polyfit(d[sel], state.u[sel], 1)[0])


# -- cosh profile and the slope ODE ------------------------------------------

def cosh_profile(alpha: float, beta: float, epsilon: float, x):
    """``alpha * cosh((x - beta) / (alpha * sqrt(eps)))``, a stationary solution."""
    if not epsilon > 0:
        raise ValidationError("cosh profile needs epsilon > 0")
    if alpha == 0:
        raise ValidationError("cosh profile needs alpha != 0")
    out = alpha * np.cosh((np.asarray(x, dtype=float) - beta) / (abs(alpha) * math.sqrt(epsilon)))
    return float(out) if np.ndim(out) == 0 else out


def slope_ode_solve(s0: float, epsilon: float, t: float) -> float:
    """Slope at a fixed upward crossing, solving ``ds/dt = -s^2 / (1 + eps s^2)``.

    Integrating gives ``1/s - eps*s = 1/s0 - eps*s0 + t``, a quadratic in s
    whose positive root lies in ``(0, s0]``; it is evaluated in closed form.
    """
    if not s0 > 0:
        raise ValidationError("slope_ode_solve needs s0 > 0 (an upward crossing)")
    if t < 0 or epsilon < 0:
        raise ValidationError("t and epsilon must be >= 0")
    if t == 0:
        return float(s0)
    if epsilon == 0:
        return s0 / (1.0 + s0 * t)
    c = 1.0 / s0 - epsilon * s0 + t
    root = math.sqrt(c * c + 4.0 * epsilon)
    # pick the algebraically equivalent form that avoids cancellation
    s = 2.0 / (c + root) if c >= 0 else (root - c) / (2.0 * epsilon)
    return min(s, float(s0))


def slope_ode_residual(s: float, s0: float, epsilon: float, t: float) -> float:
    return (1.0 / s - epsilon * s) - (1.0 / s0 - epsilon * s0) - t


def cap_excess_mass(width: float, alpha: float, epsilon: float, slope: float) -> float:
    """Mass of a cosh cap of given width above a linear ramp that meets it at height alpha.

    The cap sits on the side of the ramp's discontinuity where the ramp value is
    ``alpha``; ``slope`` is the ramp slope (positive for the N-wave ramp).
    """
    a = abs(alpha) * math.sqrt(epsilon)
    return alpha * (a * math.sinh(width / a) - width) + math.copysign(0.5 * slope * width ** 2, alpha)


def cap_width(mass: float, alpha: float, epsilon: float, slope: float = 0.0,
              bracket_scale: float = 10.0) -> float:
    """Width of the cosh cap carrying ``mass`` (solved by bracketed root finding)."""
    if mass == 0 or alpha == 0 or math.copysign(1, mass) != math.copysign(1, alpha):
        return 0.0
    a = abs(alpha) * math.sqrt(epsilon)
    hi = bracket_scale * a

    def g(w):
        return cap_excess_mass(w, alpha, epsilon, slope) - mass

    while abs(cap_excess_mass(hi, alpha, epsilon, slope)) < abs(mass):
        hi *= 1.5
    return brentq(g, 0.0, hi, xtol=1e-15, rtol=1e-14)


# -- spike detection ---------------------------------------------------------

@dataclass
class SpikeReport:
    location: float
    peak_pos: float
    peak_neg: float
    width: float
    net_mass: float
    cosh_alpha: Optional[float] = None
    cosh_beta: Optional[float] = None
    peak_pos_x: float = math.nan
    peak_neg_x: float = math.nan
    base_pos: float = math.nan
    base_neg: float = math.nan
    mass_pos: float = 0.0
    mass_neg: float = 0.0
    window: tuple = (0, 0)

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["window"] = list(self.window)
        return d


def median_background(state: FieldState, halfwidth: Optional[int] = None) -> np.ndarray:
    """Running median of ``u``; the default half-width is n/20 cells, capped to [2, 32]."""
    if halfwidth is None:
        halfwidth = max(2, min(32, state.grid.cells // 20))
    return median_filter(state.u, size=2 * halfwidth + 1, mode="wrap")


def detect_spike(state: FieldState, background=None, threshold: float = 1.0,
                 edge_level: float = 0.01, epsilon: Optional[float] = None,
                 halfwidth: Optional[int] = None) -> Optional[SpikeReport]:
    """Find the dominant spike; ``None`` when nothing clears the threshold.

    ``background`` is an :class:`AsymptoticProfile`, an array, or ``None`` for
    a running median. A spike needs ``max|u - bg| > threshold * max|bg|``. The
    window extends while ``|u - bg|`` stays above ``edge_level`` of its peak.
    Passing ``epsilon`` fits the cosh cap of the positive lobe.
    """
    u = state.u
    g = state.grid
    n = g.cells
    if background is None:
        bg = median_background(state, halfwidth)
    elif isinstance(background, AsymptoticProfile):
        bg = background.linear(g.centers)
    else:
        bg = np.broadcast_to(np.asarray(background, dtype=float), u.shape)
    scale = float(np.max(np.abs(bg))) or float(np.max(np.abs(u))) or 1.0
    ex = u - bg
    k = int(np.argmax(np.abs(ex)))
    peak_ex = abs(ex[k])
    if not peak_ex > threshold * scale:
        return None

    def extent(level):
        lo = hi = 0
        while lo < n - 1 and abs(ex[(k - lo - 1) % n]) > level:
            lo += 1
        while hi < n - 1 - lo and abs(ex[(k + hi + 1) % n]) > level:
            hi += 1
        return lo, hi

    lo, hi = extent(edge_level * peak_ex)
    offs = np.arange(-lo, hi + 1)
    cells = (k + offs) % n
    xs = g.centers[k] + offs * g.dx
    ew = ex[cells]
    uw = u[cells]
    ip, ineg = int(np.argmax(uw)), int(np.argmin(uw))

    # full width at half maximum of |u - bg|, edges interpolated
    half = 0.5 * peak_ex
    a = np.abs(ew)
    j0 = j1 = lo
    while j0 > 0 and a[j0 - 1] >= half:
        j0 -= 1
    while j1 < len(a) - 1 and a[j1 + 1] >= half:
        j1 += 1
    left = xs[j0] - g.dx * ((a[j0] - half) / (a[j0] - a[j0 - 1]) if j0 > 0 else 0.5)
    right = xs[j1] + g.dx * ((a[j1] - half) / (a[j1] - a[j1 + 1]) if j1 < len(a) - 1 else 0.5)
    width = right - left

    two_signed = ew[ip] > 0 > ew[ineg] and min(ew[ip], -ew[ineg]) > 0.25 * peak_ex
    location = xs[lo]
    if two_signed:
        s, e = sorted((ip, ineg))
        for j in range(s, e):
            if np.sign(uw[j]) != np.sign(uw[j + 1]) and uw[j] != uw[j + 1]:
                location = xs[j] + g.dx * uw[j] / (uw[j] - uw[j + 1])
                break

    pos_side = ew > 0
    mass_pos = float(g.dx * ew[pos_side].sum())
    mass_neg = float(g.dx * ew[~pos_side].sum())
    # the lobe's outer edge is the window end on its side of the discontinuity
    base_pos = bg[cells[0]] if ip <= ineg or not two_signed else bg[cells[-1]]
    base_neg = bg[cells[-1]] if ip <= ineg or not two_signed else bg[cells[0]]
    rep = SpikeReport(
        location=float(g.wrap(location)),
        peak_pos=float(uw[ip]), peak_neg=float(uw[ineg]),
        width=float(width), net_mass=float(g.dx * ew.sum()),
        peak_pos_x=float(g.wrap(xs[ip])), peak_neg_x=float(g.wrap(xs[ineg])),
        base_pos=float(base_pos), base_neg=float(base_neg),
        mass_pos=mass_pos, mass_neg=mass_neg, window=(int(cells[0]), int(cells[-1])),
    )
    if epsilon is not None and epsilon > 0 and rep.base_pos > 0 and mass_pos > 0:
        w = cap_width(mass_pos, rep.base_pos, epsilon)
        edge = xs[ip] + 0.5 * g.dx if ip <= ineg else xs[ip] - 0.5 * g.dx
        rep.cosh_alpha = rep.base_pos
        rep.cosh_beta = float(g.wrap(edge - w if ip <= ineg else edge + w))
    return rep


# -- asymptotic piecewise predictor ------------------------------------------

@dataclass(frozen=True)
class CoshCap:
    alpha: float
    beta: float
    epsilon: float
    mass: float
    edge: float  # position of the discontinuity the cap runs into

    @property
    def width(self) -> float:
        return abs(self.edge - self.beta)

    @property
    def peak_position(self) -> float:
        return self.edge

    @property
    def peak_value(self) -> float:
        return cosh_profile(self.alpha, self.beta, self.epsilon, self.edge) if self.alpha else 0.0

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "epsilon": self.epsilon,
                "mass": self.mass, "edge": self.edge, "peak_value": self.peak_value}


@dataclass(frozen=True)
class AsymptoticProfile:
    """Linear ramp ``a + b x`` through the upward crossing, cut at the downward one."""

    slope_b: float
    intercept_a: float
    x_up: float
    x_down: float
    length: float
    origin: float
    time: float
    epsilon: float
    spikes: tuple = field(default_factory=tuple)

    def _unwrap(self, x):
        return self.x_down + np.mod(np.asarray(x, dtype=float) - self.x_down, self.length)

    def linear(self, x):
        return self.intercept_a + self.slope_b * self._unwrap(x)

    def evaluate(self, x):
        """Ramp with each cosh cap substituted where it rises above the ramp."""
        xi = self._unwrap(x)
        out = self.intercept_a + self.slope_b * xi
        for cap in self.spikes:
            if cap.mass == 0:
                continue
            edge = cap.edge if cap.alpha < 0 else cap.edge + self.length
            beta = cap.beta if cap.alpha < 0 else cap.beta + self.length
            lo, hi = sorted((beta, edge))
            sel = (xi >= lo) & (xi <= hi)
            out[sel] = cosh_profile(cap.alpha, beta, cap.epsilon, xi[sel])
        return out

    def to_dict(self) -> dict:
        return {
            "time": self.time, "epsilon": self.epsilon,
            "slope_b": self.slope_b, "intercept_a": self.intercept_a,
            "x_up": self.x_up, "x_down": self.x_down,
            "length": self.length, "origin": self.origin,
            "spikes": [c.to_dict() for c in self.spikes],
        }


def asymptotic_profile(initial: FieldState, epsilon: float, t: float) -> AsymptoticProfile:
    """Predict the late-time N-wave-with-spike shape from the initial data.

    1. the slope at the (fixed) upward crossing follows :func:`slope_ode_solve`;
    2. the ramp passes through that crossing;
    3. each spike holds the initial mass of its crossing-bounded lobe minus
       the ramp's mass over the same window;
    4. a cap's alpha is the ramp height where it meets the discontinuity;
    5. beta is fixed by matching the cap's excess mass.
    """
    if not epsilon > 0:
        raise ValidationError("asymptotic profile needs epsilon > 0")
    if t < 0:
        raise ValidationError("t must be >= 0")
    cr = zero_crossings(initial)
    ups = [c for c in cr if c.direction == "upward"]
    downs = [c for c in cr if c.direction == "downward"]
    if len(ups) != 1 or len(downs) != 1:
        raise UnsupportedTopology(
            f"need exactly one upward and one downward crossing, found {len(ups)} and {len(downs)}")
    L = initial.grid.length
    xd = downs[0].position
    xu = xd + (ups[0].position - xd) % L
    s0 = local_slope(initial, ups[0].position, inner=0, outer=4)
    if s0 <= 0:
        raise ValidationError("initial slope at the upward crossing is not positive")
    b = slope_ode_solve(s0, epsilon, t)
    a = -b * xu

    pos_mass = mass_between(initial, xu, xd + L) - 0.5 * b * (xd + L - xu) ** 2
    neg_mass = mass_between(initial, xd, xu) + 0.5 * b * (xu - xd) ** 2
    pos_mass = max(pos_mass, 0.0)
    neg_mass = min(neg_mass, 0.0)

    caps = []
    alpha_pos = b * (xd + L - xu)
    w = cap_width(pos_mass, alpha_pos, epsilon, b)
    caps.append(CoshCap(alpha_pos, float((xd - w) % L), epsilon, pos_mass, xd))
    alpha_neg = b * (xd - xu)
    w = cap_width(neg_mass, alpha_neg, epsilon, b)
    caps.append(CoshCap(alpha_neg, float(xd + w), epsilon, neg_mass, xd))
    return AsymptoticProfile(b, a, float(ups[0].position), float(xd), L,
                             initial.grid.origin, float(t), float(epsilon), tuple(caps))


# -- trajectories --------------------------------------------------------------

def running_extrema(trajectory) -> np.ndarray:
    """Rows of ``(time, max u, min u)``, one per frame."""
    return np.array([(f.time, f.u.max(), f.u.min()) for f in trajectory.frames])
