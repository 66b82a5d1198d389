"""Closed forms for the one-dimensional model u_t + |x| u_x^2 / 2 = 0.

With the clamped ramp initial datum, the substitution y = A(x),
A(x) = 2 sign(x) sqrt(|x|), turns the model into v_t + v_y^2 / 2 = 0 whose
solution is the Hopf-Lax envelope of v0(y) = g(A^{-1}(y)).  Working the
envelope out by cases yields a five-branch piecewise solution for t < 2
and, on -2 < y <= 0, an extension for t > 2 where the pullback
u(x, t) = v(A(x), t) loses Lipschitz continuity and becomes exactly
1/2-Hoelder at 0^-.

Numerical routes kept alongside the closed forms: a bracketed
golden-section Hopf-Lax evaluator, a log-log Hoelder exponent fit, and a
discrete slope check against the comparison-principle bound C*T/(T-t)
valid up to the Lipschitz-preservation horizon T = 2/(L*C).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np

from .costs import TerminalCost, from_function

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class UncoveredRegionError(ValueError):
    """No closed-form branch covers the requested (x, t)."""


class Branch(Enum):
    FLAT_NEG = "flat-neg"                    # x <= -2: constant -1
    SHIFTED_PARABOLA = "shifted-parabola"    # (x+2)^2/(2t) - 1
    INNER_PARABOLA = "inner-parabola"        # x^2/(2(t-2))
    OUTER_PARABOLA = "outer-parabola"        # x^2/(2(t+2))
    FLAT_POS = "flat-pos"                    # constant 1
    SHIFTED_PARABOLA_LATE = "shifted-parabola-late"  # t > 2 branch on (-2, 0]


@dataclass(frozen=True)
class PiecewiseSolution1D:
    branch: Branch
    value: float


def exact_v(x: float, t: float) -> PiecewiseSolution1D:
    """Branch-dispatched closed form of the transformed solution v(x, t).

    Covered regions: all x for 0 <= t < 2, and -2 < x <= 0 for t > 2.
    Boundary points take the first matching branch in the listed order
    (adjacent branches agree there).  Note the inner parabola divides by
    t - 2 < 0 on its region, giving the negative values that make it join
    the neighbouring branches continuously; it is used verbatim.
    """
    if not (np.isfinite(x) and np.isfinite(t)):
        raise ValueError("x and t must be finite")
    if 0.0 <= t < 2.0:
        if x <= -2.0:
            return PiecewiseSolution1D(Branch.FLAT_NEG, -1.0)
        if x <= 0.0:
            if t >= x + 2.0:
                return PiecewiseSolution1D(
                    Branch.SHIFTED_PARABOLA, (x + 2.0) ** 2 / (2.0 * t) - 1.0
                )
            return PiecewiseSolution1D(Branch.INNER_PARABOLA, x * x / (2.0 * (t - 2.0)))
        if t >= 0.5 * x * x - 2.0:
            return PiecewiseSolution1D(Branch.OUTER_PARABOLA, x * x / (2.0 * (t + 2.0)))
        return PiecewiseSolution1D(Branch.FLAT_POS, 1.0)
    if t > 2.0 and -2.0 < x <= 0.0:
        return PiecewiseSolution1D(
            Branch.SHIFTED_PARABOLA_LATE, (x + 2.0) ** 2 / (2.0 * t) - 1.0
        )
    raise UncoveredRegionError(
        f"no closed-form branch covers (x, t) = ({x}, {t}); "
        "covered: 0 <= t < 2 for all x, and t > 2 for -2 < x <= 0"
    )


def transform_A(x):
    """A(x) = 2 sign(x) sqrt(|x|); odd, increasing, inverse of A_inv."""
    x = np.asarray(x, dtype=float)
    out = 2.0 * np.sign(x) * np.sqrt(np.abs(x))
    return float(out) if out.ndim == 0 else out


def transform_A_inv(y):
    """A^{-1}(y) = sign(y) y^2 / 4."""
    y = np.asarray(y, dtype=float)
    out = 0.25 * np.sign(y) * y * y
    return float(out) if out.ndim == 0 else out


def exact_u(x: float, t: float) -> float:
    """u(x, t) = v(A(x), t); errors propagate from uncovered v regions."""
    return exact_v(transform_A(float(x)), t).value


def exact_u_late_explicit(x: float, t: float) -> float:
    """Explicit t > 2 form on -1 < x <= 0: (-2x - 4 sqrt(-x) + 2)/t - 1.

    Equals the composition exact_u on its region; exposed separately so the
    two routes can be cross-checked.
    """
    if t <= 2.0 or not (-1.0 < x <= 0.0):
        raise UncoveredRegionError("explicit late form needs t > 2 and -1 < x <= 0")
    return (-2.0 * x - 4.0 * math.sqrt(-x) + 2.0) / t - 1.0


def pullback_initial(g: TerminalCost) -> TerminalCost:
    """Initial datum of the transformed problem: v0(y) = g(A^{-1}(y))."""
    if g.dim != 1:
        raise ValueError("the transform is one-dimensional")
    return from_function(lambda y: g(transform_A_inv(y)), bound=g.bound, kind="pullback")


def _golden_min(f: Callable[[float], float], a: float, b: float, xtol: float):
    """Golden-section minimum of f on [a, b]; returns (x, f(x))."""
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(200):
        if b - a <= xtol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    xm = (a + b) / 2.0
    return xm, f(xm)


def hopf_lax(
    v0: TerminalCost,
    x: float,
    t: float,
    n_coarse: int = 161,
    xtol: float = 1e-9,
    return_argmin: bool = False,
):
    """min over y of v0(y) + (x - y)^2 / (2t) by bracketing + golden section.

    The search window is |y - x| <= sqrt(4 t ||v0||): outside it the
    quadratic term alone exceeds what any v0 value could recover relative
    to the y = x candidate.  Every coarse local minimum is refined; exact
    ties report the smallest minimizer.  Rejects t <= 0 (use v0(x) at 0).
    """
    if t <= 0.0:
        raise ValueError("hopf_lax needs t > 0; the t = 0 value is v0(x)")
    radius = math.sqrt(4.0 * t * v0.bound)
    if radius == 0.0:
        val = float(v0(x))
        return (val, float(x)) if return_argmin else val

    def f(y: float) -> float:
        return float(v0(y)) + (x - y) ** 2 / (2.0 * t)

    ys = np.linspace(x - radius, x + radius, n_coarse)
    fs = np.asarray(v0(ys), dtype=float) + (x - ys) ** 2 / (2.0 * t)
    best_val = math.inf
    best_y = math.inf
    for i in range(n_coarse):
        left_ok = i == 0 or fs[i] <= fs[i - 1]
        right_ok = i == n_coarse - 1 or fs[i] <= fs[i + 1]
        if not (left_ok and right_ok):
            continue
        lo = ys[max(i - 1, 0)]
        hi = ys[min(i + 1, n_coarse - 1)]
        ym, vm = _golden_min(f, lo, hi, xtol)
        if vm < best_val or (vm == best_val and ym < best_y):
            best_val, best_y = vm, ym
    return (best_val, best_y) if return_argmin else best_val


@dataclass(frozen=True)
class HolderFit:
    """Least-squares modulus-of-continuity exponent on dyadic offsets."""

    exponent: float
    intercept: float
    r2: float
    offsets: np.ndarray

    def as_dict(self) -> dict:
        return {
            "exponent": self.exponent,
            "intercept": self.intercept,
            "r2": self.r2,
            "offsets": self.offsets.tolist(),
        }


def holder_fit(
    f: Callable[[float], float],
    x0: float,
    base_offset: float = 0.01,
    levels: int = 8,
    side: int = 1,
) -> HolderFit:
    """Fit |f(x0 + s h) - f(x0)| ~ C h^alpha over h = base * 2^-k.

    `side` = +1 or -1 picks one-sided offsets; use the singular side when
    x0 sits on a kink.  The r-squared of the log-log fit is reported, not
    silently thresholded.
    """
    if levels < 4:
        raise ValueError("need at least 4 dyadic levels")
    if side not in (1, -1):
        raise ValueError("side must be +1 or -1")
    hs = base_offset * 0.5 ** np.arange(levels)
    f0 = float(f(x0))
    deltas = np.array([abs(float(f(x0 + side * h)) - f0) for h in hs])
    if np.any(deltas == 0.0):
        raise ValueError("zero increment encountered; shrink base_offset")
    lx = np.log(hs)
    ly = np.log(deltas)
    slope, intercept = np.polyfit(lx, ly, 1)
    fitted = slope * lx + intercept
    ss_res = float(np.sum((ly - fitted) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0.0 else 1.0
    return HolderFit(float(slope), float(intercept), r2, hs)


def lipschitz_horizon(c: float, l: float) -> float:
    """Lipschitz-preservation (and uniqueness) horizon T = 2/(L C)."""
    if c <= 0.0 or l <= 0.0:
        raise ValueError("C and L must be positive")
    return 2.0 / (l * c)


def lipschitz_bound_check(
    field,
    c: float,
    l: float,
    times: Sequence[float],
    xs: Optional[np.ndarray] = None,
    eps_slope: float = 0.05,
) -> dict:
    """Compare per-slice max discrete slopes with (1+eps)*C*T/(T-t).

    `field` is either a callable f(x, t) or a ValueField (its own nodes are
    used).  All requested times must precede the horizon T = 2/(L C).
    """
    horizon = lipschitz_horizon(c, l)
    callable_mode = callable(field) and not hasattr(field, "values")
    if callable_mode:
        if xs is None:
            xs = np.linspace(-4.0, 4.0, 2001)
        xs = np.asarray(xs, dtype=float)
    results = {}
    all_ok = True
    for t in times:
        if t >= horizon:
            raise ValueError(f"time {t} is past the horizon {horizon}")
        if callable_mode:
            vals = np.array([field(x, t) for x in xs])
            slopes = np.abs(np.diff(vals)) / np.diff(xs)
        else:
            grid = field.axes()[0]
            k = int(round(t / field.dt))
            vals = field.values[k]
            slopes = np.abs(np.diff(vals)) / np.diff(grid)
        max_slope = float(np.max(slopes))
        bound = c * horizon / (horizon - t)
        ok = max_slope <= (1.0 + eps_slope) * bound
        all_ok = all_ok and ok
        results[float(t)] = {"max_slope": max_slope, "bound": bound, "ok": ok}
    return {"horizon": horizon, "eps_slope": eps_slope, "ok": all_ok, "times": results}


def branch_kink_distances() -> list[Callable[[float, float], float]]:
    """Distance estimates to the branch boundaries of the transformed solution.

    Used to exclude tubes around non-smooth curves in comparisons and to let
    the PDE residual probe flag kink proximity.
    """
    return [
        lambda x, t: abs(x + 2.0),
        lambda x, t: abs(x),
        lambda x, t: abs(t - (x + 2.0)) / math.sqrt(2.0),
        lambda x, t: abs(t - (0.5 * x * x - 2.0)) / math.sqrt(1.0 + x * x),
    ]


def min_kink_distance(x: float, t: float) -> float:
    return min(f(x, t) for f in branch_kink_distances())
