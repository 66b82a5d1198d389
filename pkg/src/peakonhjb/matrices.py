"""Peakon interaction matrix, its PSD square root, and regularity probes.

The interaction matrix of N peakon positions x = (x_1, ..., x_N) is

    E(x)[i, j] = exp(-|x_i - x_j|),

symmetric positive semi-definite for every x, degenerate exactly on the
collision set {x_i = x_j}.  For N = 2 the symmetric PSD root and its
inverse have closed forms in rho = |x_1 - x_2|:

    sqrt(E)   = 1/2 [[u + v, u - v], [u - v, u + v]],   u = sqrt(1 + e^-rho),
                                                        v = sqrt(1 - e^-rho),
    sqrt(E)^-1 = 1/2 [[1/u + 1/v, 1/u - 1/v], [1/u - 1/v, 1/u + 1/v]].

For general N the root is computed spectrally.  The map x -> E(x) is
Lipschitz and x -> sqrt(E(x)) is 1/2-Hoelder; `probe_constants` samples
empirical constants for both moduli.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# E is PSD analytically; eigenvalues below -EPS_PSD indicate a genuinely
# non-PSD input rather than round-off.
EPS_PSD = 1e-10
# 1 - exp(-rho) vanishes linearly in rho = |x_1 - x_2|.
EPS_DEG = 1e-12
JACOBI_TOL = 1e-13


class DegenerateRootError(ValueError):
    """Inverse root requested at (or too close to) a collision point."""


class NotPositiveSemiDefiniteError(ValueError):
    """Spectral root requested for a matrix with a genuinely negative eigenvalue."""


def as_positions(x) -> np.ndarray:
    """Validate and return peakon positions as a float array."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError("positions must be a non-empty 1-d sequence")
    if not np.all(np.isfinite(arr)):
        raise ValueError("positions must be finite")
    return arr


def build_interaction_matrix(x) -> np.ndarray:
    """E(x)[i, j] = exp(-|x_i - x_j|), unit diagonal, symmetric PSD."""
    pos = as_positions(x)
    e = np.exp(-np.abs(pos[:, None] - pos[None, :]))
    # enforce exact symmetry against any asymmetric rounding of |xi - xj|
    return (e + e.T) / 2.0


def _root_entries(rho: float) -> tuple[float, float]:
    """Diagonal and off-diagonal entry of sqrt(E) for N=2 at separation rho."""
    e = math.exp(-abs(rho))
    u = math.sqrt(1.0 + e)
    v = math.sqrt(1.0 - e)
    return (u + v) / 2.0, (u - v) / 2.0


def sqrt_2d(x) -> np.ndarray:
    """Closed-form symmetric PSD square root of E(x) for two positions."""
    pos = as_positions(x)
    if pos.size != 2:
        raise ValueError(f"sqrt_2d needs exactly 2 positions, got {pos.size}")
    p, q = _root_entries(pos[0] - pos[1])
    return np.array([[p, q], [q, p]])


def inv_sqrt_2d(x) -> np.ndarray:
    """Explicit inverse of sqrt(E(x)) for two distinct positions.

    Raises DegenerateRootError when |x_1 - x_2| <= EPS_DEG, where
    1 - exp(-rho) underflows and the inverse blows up.
    """
    pos = as_positions(x)
    if pos.size != 2:
        raise ValueError(f"inv_sqrt_2d needs exactly 2 positions, got {pos.size}")
    rho = abs(pos[0] - pos[1])
    if rho <= EPS_DEG:
        raise DegenerateRootError(
            f"|x1 - x2| = {rho:.3e} <= {EPS_DEG:.0e}: sqrt(E) is singular"
        )
    e = math.exp(-rho)
    pu = 1.0 / math.sqrt(1.0 + e)
    pv = 1.0 / math.sqrt(-math.expm1(-rho))  # 1/sqrt(1 - e^-rho), stable for small rho
    p = (pu + pv) / 2.0
    q = (pu - pv) / 2.0
    return np.array([[p, q], [q, p]])


def jacobi_eigh(m: np.ndarray, tol: float = JACOBI_TOL, max_sweeps: int = 64):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Branch-free and deterministic: pivots are swept in fixed row order until
    every off-diagonal entry is below `tol`.  Returns (eigenvalues, vectors)
    with eigenvalues unordered (diagonal order after convergence).
    """
    a = np.array(m, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    if not np.allclose(a, a.T, atol=0.0, rtol=0.0):
        a = (a + a.T) / 2.0
    v = np.eye(n)
    for _ in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) > off:
                    off = abs(apq)
                if abs(apq) <= tol:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (
                    abs(theta) + math.sqrt(1.0 + theta * theta)
                )
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                rot_p = c * a[:, p] - s * a[:, q]
                rot_q = s * a[:, p] + c * a[:, q]
                a[:, p], a[:, q] = rot_p, rot_q
                rot_p = c * a[p, :] - s * a[q, :]
                rot_q = s * a[p, :] + c * a[q, :]
                a[p, :], a[q, :] = rot_p, rot_q
                a[p, q] = a[q, p] = 0.0
                rot_p = c * v[:, p] - s * v[:, q]
                rot_q = s * v[:, p] + c * v[:, q]
                v[:, p], v[:, q] = rot_p, rot_q
        if off <= tol:
            break
    return np.diag(a).copy(), v


def sqrt_psd_general(m: np.ndarray, eps_psd: float = EPS_PSD) -> np.ndarray:
    """Symmetric PSD square root of a symmetric PSD matrix, spectrally.

    Eigenvalues in [-eps_psd, 0) are clamped to 0 (round-off of an
    analytically PSD input); anything below -eps_psd raises.
    """
    m = np.asarray(m, dtype=float)
    lam, vec = jacobi_eigh(m)
    lo = lam.min()
    if lo < -eps_psd:
        raise NotPositiveSemiDefiniteError(f"eigenvalue {lo:.3e} < -{eps_psd:.0e}")
    lam = np.where(lam < 0.0, 0.0, lam)
    root = (vec * np.sqrt(lam)) @ vec.T
    return (root + root.T) / 2.0


def operator_norm(m: np.ndarray) -> float:
    """Operator (spectral) norm of a symmetric matrix."""
    lam, _ = jacobi_eigh(np.asarray(m, dtype=float))
    return float(np.max(np.abs(lam)))


@dataclass(frozen=True)
class RegularityConstants:
    """Empirical moduli of the maps x -> E(x) and x -> sqrt(E(x)).

    l0: max ||E(x)-E(y)|| / ||x-y||        (Lipschitz ratio of E)
    c0: max ||E(x)||                        (norm bound of E)
    l1: max ||sqrt(E(x))-sqrt(E(y))|| / sqrt(||x-y||)   (1/2-Hoelder ratio)
    c1: max ||sqrt(E(x))||                  (norm bound of the root)

    These are sample maxima, never treated as the analytic suprema.  For
    N = 2 the analytic values are c0 = 2 and c1 = sqrt(2), attained only
    in the collision limit.
    """

    l0: float
    c0: float
    l1: float
    c1: float
    samples: int
    seed: int

    def as_dict(self) -> dict:
        return {
            "l0": self.l0,
            "c0": self.c0,
            "l1": self.l1,
            "c1": self.c1,
            "samples": self.samples,
            "seed": self.seed,
        }


def probe_constants(
    samples: int,
    bounds: tuple[float, float] = (-10.0, 10.0),
    dim: int = 2,
    seed: int = 42,
) -> RegularityConstants:
    """Sample empirical regularity constants over random position pairs.

    Draws `samples` pairs (x, y) uniformly from the box bounds^dim and
    records the max ratios defining l0, l1 and the max norms c0, c1.
    Coincident pairs contribute 0 to the ratios.  Deterministic per seed.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    lo, hi = bounds
    l0 = l1 = c0 = c1 = 0.0
    for _ in range(samples):
        x = rng.uniform(lo, hi, size=dim)
        y = rng.uniform(lo, hi, size=dim)
        ex, ey = build_interaction_matrix(x), build_interaction_matrix(y)
        if dim == 2:
            rx, ry = sqrt_2d(x), sqrt_2d(y)
        else:
            rx, ry = sqrt_psd_general(ex), sqrt_psd_general(ey)
        c0 = max(c0, operator_norm(ex))
        c1 = max(c1, operator_norm(rx))
        d = float(np.linalg.norm(x - y))
        if d > 0.0:
            l0 = max(l0, operator_norm(ex - ey) / d)
            l1 = max(l1, operator_norm(rx - ry) / math.sqrt(d))
    return RegularityConstants(l0=l0, c0=c0, l1=l1, c1=c1, samples=samples, seed=seed)
