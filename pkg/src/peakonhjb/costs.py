"""Bounded continuous terminal costs for the control problem.

Builtins: a clamped linear ramp (per coordinate, multiplied across axes in
dimension > 1), a constant, a Gaussian bump, and 1-d tabulated samples with
linear interpolation and constant extension beyond the sample range.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class TerminalCost:
    """Bounded continuous cost g with a known sup-norm bound.

    `fn` accepts scalars or arrays for dim == 1, and arrays of shape
    (..., dim) for dim >= 2; it evaluates elementwise over the batch.
    """

    kind: str
    dim: int
    bound: float
    fn: Callable = field(repr=False, compare=False)
    params: dict = field(default_factory=dict)

    def __call__(self, x):
        return self.fn(x)

    def describe(self) -> dict:
        return {"kind": self.kind, "dim": self.dim, "bound": self.bound, **self.params}


def clamp_linear(slope: float = 1.0, cap: float = 1.0, dim: int = 1) -> TerminalCost:
    """Ramp clamped to [-cap, cap]; product of per-axis ramps for dim >= 2."""
    if cap <= 0.0 or slope == 0.0:
        raise ValueError("cap must be positive and slope nonzero")

    def fn(x):
        x = np.asarray(x, dtype=float)
        if dim == 1:
            return np.clip(slope * x, -cap, cap)
        if x.shape[-1] != dim:
            raise ValueError(f"expected trailing axis of size {dim}")
        return np.prod(np.clip(slope * x, -cap, cap), axis=-1)

    return TerminalCost(
        kind="clamp-linear",
        dim=dim,
        bound=cap**dim,
        fn=fn,
        params={"slope": slope, "cap": cap},
    )


def constant(value: float = 0.0, dim: int = 1) -> TerminalCost:
    def fn(x):
        x = np.asarray(x, dtype=float)
        shape = x.shape if dim == 1 else x.shape[:-1]
        return np.full(shape, value) if shape else float(value)

    return TerminalCost(
        kind="constant", dim=dim, bound=abs(value), fn=fn, params={"value": value}
    )


def gaussian_bump(
    amplitude: float = 1.0,
    width: float = 1.0,
    center=None,
    dim: int = 1,
) -> TerminalCost:
    if width <= 0.0:
        raise ValueError("width must be positive")
    c = np.zeros(dim) if center is None else np.asarray(center, dtype=float)

    def fn(x):
        x = np.asarray(x, dtype=float)
        if dim == 1:
            r2 = (x - c[0]) ** 2
        else:
            r2 = np.sum((x - c) ** 2, axis=-1)
        return amplitude * np.exp(-r2 / (2.0 * width**2))

    return TerminalCost(
        kind="gaussian-bump",
        dim=dim,
        bound=abs(amplitude),
        fn=fn,
        params={"amplitude": amplitude, "width": width, "center": c.tolist()},
    )


def tabulated(xs, values) -> TerminalCost:
    """1-d cost from samples: linear interpolation inside, constant outside."""
    xs = np.asarray(xs, dtype=float)
    values = np.asarray(values, dtype=float)
    if xs.ndim != 1 or xs.shape != values.shape or xs.size < 2:
        raise ValueError("need matching 1-d sample arrays with >= 2 points")
    if not np.all(np.diff(xs) > 0.0):
        raise ValueError("sample abscissae must be strictly increasing")

    def fn(x):
        return np.interp(np.asarray(x, dtype=float), xs, values)

    return TerminalCost(
        kind="tabulated",
        dim=1,
        bound=float(np.max(np.abs(values))),
        fn=fn,
        params={"n_samples": int(xs.size)},
    )


def from_function(fn: Callable, bound: float, dim: int = 1, kind: str = "custom") -> TerminalCost:
    """Wrap an arbitrary bounded continuous function; the bound is trusted."""
    return TerminalCost(kind=kind, dim=dim, bound=float(bound), fn=fn)
