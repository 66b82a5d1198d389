"""State-equation integration and the multipeakon Hamiltonian flow.

The controlled state equation is xdot = sigma(x) a(t) for a pluggable
symmetric PSD matrix field sigma; instances are the two-peakon root
sqrt(E(x)), the spectral root for general N, and the scalar sqrt(|x|)
field of the one-dimensional model.  sigma is only 1/2-Hoelder, so
solutions are not unique on the degenerate set; the fixed-step RK4
integrator is one deterministic selection map, not a resolution of that
non-uniqueness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .matrices import (
    _root_entries,
    as_positions,
    build_interaction_matrix,
    sqrt_2d,
    sqrt_psd_general,
)

# Stop the Hamiltonian flow when peaks get closer than this: the q-gradient
# has a sign(q_i - q_j) kink there and continuation is a separate problem.
EPS_COLLISION = 1e-6
BLOWUP_LIMIT = 1e12


class IntegrationBlowUpError(RuntimeError):
    """Trajectory left the finite range; carries the last good time."""


class SigmaField:
    """Matrix field x -> sigma(x), symmetric PSD, applied to control vectors."""

    def __init__(self, label: str, dim: int, mat_fn: Callable, batch_fn=None, norm_fn=None):
        self.label = label
        self.dim = dim
        self._mat_fn = mat_fn
        self._batch_fn = batch_fn
        self._norm_fn = norm_fn

    def __repr__(self):
        return f"SigmaField({self.label!r}, dim={self.dim})"

    def __call__(self, x) -> np.ndarray:
        return self._mat_fn(np.asarray(x, dtype=float))

    def apply(self, x, a) -> np.ndarray:
        """sigma(x) @ a for a single state."""
        return self.apply_batch(
            np.asarray(x, dtype=float)[None, :], np.asarray(a, dtype=float)[None, :]
        )[0]

    def apply_batch(self, states: np.ndarray, controls: np.ndarray) -> np.ndarray:
        """Row-wise sigma(states[i]) @ controls[i]."""
        if self._batch_fn is not None:
            return self._batch_fn(states, controls)
        out = np.empty_like(controls)
        for i in range(states.shape[0]):
            out[i] = self._mat_fn(states[i]) @ controls[i]
        return out

    def norm_bound(self, box) -> float:
        """Upper bound on ||sigma(x)|| over the box [(lo1,hi1),...]."""
        if self._norm_fn is not None:
            return self._norm_fn(box)
        return math.sqrt(self.dim)


def sqrt_abs_1d() -> SigmaField:
    """1x1 field sigma(x) = sqrt(|x|) of the model u_t + |x| u_x^2 / 2 = 0."""

    def mat(x):
        return np.array([[math.sqrt(abs(float(x[0])))]])

    def batch(states, controls):
        return np.sqrt(np.abs(states)) * controls

    def norm(box):
        (lo, hi) = box[0] if np.ndim(box[0]) else box
        return math.sqrt(max(abs(lo), abs(hi)))

    return SigmaField("sqrt-abs-1d", 1, mat, batch, norm)


def _peakon2_batch(states: np.ndarray, controls: np.ndarray) -> np.ndarray:
    e = np.exp(-np.abs(states[:, 0] - states[:, 1]))
    u = np.sqrt(1.0 + e)
    v = np.sqrt(1.0 - e)
    p = (u + v) / 2.0
    q = (u - v) / 2.0
    out = np.empty_like(controls)
    out[:, 0] = p * controls[:, 0] + q * controls[:, 1]
    out[:, 1] = q * controls[:, 0] + p * controls[:, 1]
    return out


def peakon_sigma(dim: int = 2) -> SigmaField:
    """sqrt(E(x)) as a sigma field: closed form for dim 2, spectral otherwise."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if dim == 2:
        return SigmaField(
            "peakon2", 2, sqrt_2d, _peakon2_batch, norm_fn=lambda box: math.sqrt(2.0)
        )

    def mat(x):
        return sqrt_psd_general(build_interaction_matrix(x))

    # ||E|| <= dim by Gershgorin, so the root norm is at most sqrt(dim)
    return SigmaField("peakonN", dim, mat, norm_fn=lambda box: math.sqrt(dim))


@dataclass(frozen=True)
class PiecewiseConstantControl:
    """Control constant on each of M uniform subintervals of [t_start, t_end]."""

    t_start: float
    t_end: float
    values: np.ndarray  # (M, dim)

    def __post_init__(self):
        values = np.atleast_2d(np.asarray(self.values, dtype=float))
        if values.shape[0] < 1:
            raise ValueError("need at least one subinterval")
        if not np.all(np.isfinite(values)):
            raise ValueError("control values must be finite")
        if not self.t_start < self.t_end:
            raise ValueError("t_start must precede t_end")
        object.__setattr__(self, "values", values)

    @property
    def n_intervals(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def subinterval(self) -> float:
        return (self.t_end - self.t_start) / self.n_intervals

    def norm_l2(self) -> float:
        """Exact L2 norm: the integrand is piecewise constant."""
        return math.sqrt(float(np.sum(self.values**2)) * self.subinterval)

    def squared_integral(self) -> float:
        """integral of |a(t)|^2 dt over the whole window."""
        return float(np.sum(self.values**2)) * self.subinterval


def zero_control(t_start: float, t_end: float, dim: int, n_intervals: int = 1) -> PiecewiseConstantControl:
    return PiecewiseConstantControl(t_start, t_end, np.zeros((n_intervals, dim)))


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution of the state equation with accumulated running cost."""

    times: np.ndarray
    states: np.ndarray  # (n_samples, dim)
    running_cost: np.ndarray  # 0.5 * integral of |a|^2 up to each sample

    @property
    def endpoint(self) -> np.ndarray:
        return self.states[-1]

    @property
    def t_end(self) -> float:
        return float(self.times[-1])


def integrate_state(
    sigma: SigmaField,
    control: PiecewiseConstantControl,
    y0,
    step: float,
) -> Trajectory:
    """Fixed-step RK4 for xdot = sigma(x) a(t) from (y0, t_start).

    Substeps divide each control subinterval exactly, so subinterval
    boundaries (and t_end) are hit without interpolation.  The running
    cost of a piecewise-constant control integrates exactly.  Solutions
    on the degenerate set are not unique; this scheme returns one
    deterministic selection.
    """
    y0 = as_positions(y0)
    if y0.size != sigma.dim or control.dim != sigma.dim:
        raise ValueError("dimension mismatch between sigma, control and y0")
    if step <= 0.0 or step > control.subinterval * (1.0 + 1e-12):
        raise ValueError("step must be positive and at most one subinterval")

    times = [control.t_start]
    states = [y0.copy()]
    costs = [0.0]
    x = y0.copy()
    t = control.t_start
    sub = control.subinterval
    for k in range(control.n_intervals):
        a = control.values[k]
        rate = 0.5 * float(np.dot(a, a))
        n_sub = max(1, math.ceil(sub / step - 1e-12))
        h = sub / n_sub
        for _ in range(n_sub):
            k1 = sigma.apply(x, a)
            k2 = sigma.apply(x + 0.5 * h * k1, a)
            k3 = sigma.apply(x + 0.5 * h * k2, a)
            k4 = sigma.apply(x + h * k3, a)
            x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t += h
            if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > BLOWUP_LIMIT:
                raise IntegrationBlowUpError(
                    f"state blew up near t = {t:.6g} (|x| max {np.max(np.abs(x)):.3e})"
                )
            times.append(t)
            states.append(x.copy())
            costs.append(costs[-1] + rate * h)
        # land exactly on the subinterval boundary
        t = control.t_start + (k + 1) * sub
        times[-1] = t
    return Trajectory(np.array(times), np.array(states), np.array(costs))


def bolza_cost(traj: Trajectory, g) -> float:
    """Running cost at the horizon plus terminal cost g(x(T))."""
    return float(traj.running_cost[-1]) + float(g(traj.endpoint))


@dataclass(frozen=True)
class PeakonState:
    """Positions, momenta and the Hamiltonian value H = E(q)p.p / 2."""

    q: np.ndarray
    p: np.ndarray
    h: float

    @staticmethod
    def make(q, p) -> "PeakonState":
        q = as_positions(q)
        p = as_positions(p)
        if q.size != p.size:
            raise ValueError("q and p must have the same length")
        return PeakonState(q, p, hamiltonian(q, p))


def hamiltonian(q, p) -> float:
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    e = build_interaction_matrix(q)
    return 0.5 * float(p @ e @ p)


def _peakon_rhs(q: np.ndarray, p: np.ndarray):
    # qdot_i = (E(q)p)_i; pdot_i = sum_j p_i p_j sign(q_i-q_j) e^{-|q_i-q_j|}
    # (the analytic gradient of H away from collisions, sign(0) = 0)
    d = q[:, None] - q[None, :]
    e = np.exp(-np.abs(d))
    qdot = e @ p
    pdot = p * ((np.sign(d) * e) @ p)
    return qdot, pdot


@dataclass(frozen=True)
class PeakonFlow:
    """RK4 samples of the Hamiltonian flow, halted at the first collision."""

    times: np.ndarray
    q: np.ndarray  # (n_samples, N)
    p: np.ndarray  # (n_samples, N)
    h: np.ndarray  # Hamiltonian value per sample
    collided: bool
    collision_time: Optional[float] = None

    def states(self) -> list[PeakonState]:
        return [
            PeakonState(self.q[i].copy(), self.p[i].copy(), float(self.h[i]))
            for i in range(self.times.size)
        ]


def min_gap(q: np.ndarray) -> float:
    if q.size < 2:
        return math.inf
    qs = np.sort(q)
    return float(np.min(np.diff(qs)))


def peakon_flow(initial: PeakonState, t_end: float, step: float) -> PeakonFlow:
    """Integrate the peakon Hamiltonian system until t_end or a collision.

    Fixed-step RK4 on qdot = dH/dp, pdot = -dH/dq.  When the smallest gap
    min |q_i - q_j| drops below EPS_COLLISION the run stops and the flow is
    flagged as collided (not an error); continuation past a collision is
    out of scope.
    """
    if step <= 0.0 or t_end <= 0.0:
        raise ValueError("step and t_end must be positive")
    if min_gap(initial.q) < EPS_COLLISION:
        raise ValueError("initial positions are already within collision range")
    n_steps = max(1, math.ceil(t_end / step - 1e-12))
    h = t_end / n_steps
    q = initial.q.astype(float).copy()
    p = initial.p.astype(float).copy()
    times = [0.0]
    qs = [q.copy()]
    ps = [p.copy()]
    hs = [hamiltonian(q, p)]
    collided = False
    collision_time = None
    for i in range(n_steps):
        k1q, k1p = _peakon_rhs(q, p)
        k2q, k2p = _peakon_rhs(q + 0.5 * h * k1q, p + 0.5 * h * k1p)
        k3q, k3p = _peakon_rhs(q + 0.5 * h * k2q, p + 0.5 * h * k2p)
        k4q, k4p = _peakon_rhs(q + h * k3q, p + h * k3p)
        q = q + (h / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q)
        p = p + (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        t = (i + 1) * h
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(p))) or max(
            np.max(np.abs(q)), np.max(np.abs(p))
        ) > BLOWUP_LIMIT:
            raise IntegrationBlowUpError(f"peakon flow blew up near t = {t:.6g}")
        if min_gap(q) < EPS_COLLISION:
            collided = True
            collision_time = t
            break
        times.append(t)
        qs.append(q.copy())
        ps.append(p.copy())
        hs.append(hamiltonian(q, p))
    return PeakonFlow(
        np.array(times), np.array(qs), np.array(ps), np.array(hs), collided, collision_time
    )
