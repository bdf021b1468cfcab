"""Objectives, gradients, and the gradient-descent loop.

Four problem variants share one loop: the plain least-squares objective
("vanilla"), the ridge-penalized one ("regularized"), the one with the
norm-imbalance penalty ("balancing"), and the leave-one-out problem where
one row or column is treated as fully observed.

The leave-one-out gradient uses the operator (1/p) P_{Omega minus line} +
P_{line}; its data term is written as the matching quadratic form
(1/2p) <loo_project(R), R> so that objective and gradient stay consistent
(finite differences of the objective reproduce the gradient).
"""

import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .linalg import frobenius_norm
from .metrics import (AlignmentDegenerateError, balancing_norm, dist,
                      relative_error)
from .model import FactorPair
from .sampling import LooSelector

__all__ = [
    "SolverVariant",
    "SolverConfig",
    "IterateTrace",
    "RunResult",
    "objective",
    "gradient",
    "step",
    "run",
]

DIVERGENCE_REL_ERR = 1e6


@dataclass(frozen=True)
class SolverVariant:
    """One of vanilla / regularized(lam) / balancing / leave_one_out(sel)."""

    tag: str
    lam: float | None = None
    sel: LooSelector | None = None

    @classmethod
    def vanilla(cls):
        return cls(tag="vanilla")

    @classmethod
    def regularized(cls, lam):
        if lam <= 0:
            raise ValueError(f"regularization parameter lam={lam} must be > 0")
        return cls(tag="regularized", lam=float(lam))

    @classmethod
    def balancing(cls):
        return cls(tag="balancing")

    @classmethod
    def leave_one_out(cls, sel):
        if isinstance(sel, int):
            sel = LooSelector(sel)
        return cls(tag="leave_one_out", sel=sel)


@dataclass(frozen=True)
class SolverConfig:
    variant: SolverVariant
    step: float
    max_iters: int = 5000
    tol: float = 1e-14
    record_every: int = 1
    compute_dist: bool = False
    store_factors: bool = False

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError(f"step size {self.step} must be > 0")
        if self.tol <= 0:
            raise ValueError(f"tolerance {self.tol} must be > 0")
        if self.max_iters < 1 or self.record_every < 1:
            raise ValueError("max_iters and record_every must be >= 1")


@dataclass
class IterateTrace:
    """Per recorded iteration metrics; `seconds` is cumulative wall clock."""

    k: list = field(default_factory=list)
    relative_error: list = field(default_factory=list)
    dist_to_truth: list = field(default_factory=list)
    balancing_norm: list = field(default_factory=list)
    objective: list = field(default_factory=list)
    seconds: list = field(default_factory=list)


@dataclass
class RunResult:
    final: FactorPair
    trace: IterateTrace
    status: str  # converged | max_iters | diverged
    iterations: int
    factors: list | None = None  # recorded iterates when requested


def _residual_cells(f, gt, mask):
    """Raw residual values (X Y.T - M*) at the observed cells."""
    vals = np.einsum("ij,ij->i", f.x[mask.rows], f.y[mask.cols])
    vals -= gt.m_star[mask.rows, mask.cols]
    return vals


def _scatter(mask, vals):
    out = np.zeros((mask.d1, mask.d2))
    out[mask.rows, mask.cols] = vals
    return out


def _loo_residual_matrix(f, gt, mask, sel):
    """(1/p) P_{Omega minus line} (R) + P_{line}(R), as a dense matrix.

    Observed cells on the selected line are rescaled in place (so the full
    mask p=1 case reproduces the plain residual matrix bitwise); unobserved
    line cells are filled in directly.
    """
    e = _scatter(mask, _residual_cells(f, gt, mask) / mask.p)
    t = sel.index(mask.d1)
    if sel.axis(mask.d1) == "row":
        obs = mask.row_cells(t)
        e[t, obs] *= mask.p
        unobs = np.setdiff1d(np.arange(mask.d2), obs, assume_unique=True)
        if unobs.size:
            e[t, unobs] = f.x[t] @ f.y[unobs].T - gt.m_star[t, unobs]
    else:
        obs = mask.col_cells(t)
        e[obs, t] *= mask.p
        unobs = np.setdiff1d(np.arange(mask.d1), obs)
        if unobs.size:
            e[unobs, t] = f.x[unobs] @ f.y[t] - gt.m_star[unobs, t]
    return e


def objective(f, gt, mask, variant):
    """Evaluate the selected objective at the factor pair f."""
    _check_shapes(f, gt, mask)
    p = mask.p
    if variant.tag == "leave_one_out":
        variant.sel.validate(mask.d1, mask.d2)
        g = _loo_residual_matrix(f, gt, mask, variant.sel)
        # Off-line cells of g carry R/p (objective share R^2/2p per cell),
        # the selected line carries R itself (share R^2/2 per cell).
        t = variant.sel.index(mask.d1)
        line = g[t, :] if variant.sel.axis(mask.d1) == "row" else g[:, t]
        val = 0.5 * (p * float(np.sum(g * g))
                     + (1.0 - p) * float(np.sum(line * line)))
        return val + 0.125 * balancing_norm(f) ** 2
    vals = _residual_cells(f, gt, mask)
    val = float(vals @ vals) / (2.0 * p)
    if variant.tag == "vanilla":
        return val
    if variant.tag == "regularized":
        return val + 0.5 * variant.lam * (
            float(np.sum(f.x * f.x)) + float(np.sum(f.y * f.y)))
    if variant.tag == "balancing":
        return val + 0.125 * balancing_norm(f) ** 2
    raise ValueError(f"unknown variant {variant.tag!r}")


def gradient(f, gt, mask, variant):
    """Gradient of the selected objective, as a FactorPair."""
    _check_shapes(f, gt, mask)
    if variant.tag == "leave_one_out":
        variant.sel.validate(mask.d1, mask.d2)
        g = _loo_residual_matrix(f, gt, mask, variant.sel)
        b = f.x.T @ f.x - f.y.T @ f.y
        return FactorPair(g @ f.y + 0.5 * f.x @ b,
                          g.T @ f.x - 0.5 * f.y @ b)
    g = _scatter(mask, _residual_cells(f, gt, mask) / mask.p)
    gx = g @ f.y
    gy = g.T @ f.x
    if variant.tag == "vanilla":
        return FactorPair(gx, gy)
    if variant.tag == "regularized":
        return FactorPair(gx + variant.lam * f.x, gy + variant.lam * f.y)
    if variant.tag == "balancing":
        b = f.x.T @ f.x - f.y.T @ f.y
        return FactorPair(gx + 0.5 * f.x @ b, gy - 0.5 * f.y @ b)
    raise ValueError(f"unknown variant {variant.tag!r}")


def step(f, g, s):
    """One descent update (X - s Gx, Y - s Gy)."""
    return FactorPair(f.x - s * g.x, f.y - s * g.y)


def _check_shapes(f, gt, mask):
    if f.x.shape[0] != gt.d1 or f.y.shape[0] != gt.d2:
        raise ValueError(
            f"factor heights ({f.x.shape[0]}, {f.y.shape[0]}) do not match "
            f"target dims ({gt.d1}, {gt.d2})")
    if (mask.d1, mask.d2) != (gt.d1, gt.d2):
        raise ValueError("mask dims do not match ground truth")


def run(gt, mask, config, init):
    """Gradient descent from `init` until the relative error drops below
    config.tol, the iteration cap is hit, or the run diverges.

    Deterministic for fixed inputs (the seconds column aside).
    """
    _check_shapes(init, gt, mask)
    if not (np.all(np.isfinite(init.x)) and np.all(np.isfinite(init.y))):
        raise ValueError("initial factors contain non-finite entries")
    if mask.n_cells < init.r * (gt.d1 + gt.d2):
        warnings.warn(
            f"underdetermined: |cells|={mask.n_cells} < "
            f"r(d1+d2)={init.r * (gt.d1 + gt.d2)}; proceeding",
            stacklevel=2)

    f_star = gt.optimal_pair()
    trace = IterateTrace()
    factors = [] if config.store_factors else None
    f = init
    status = "max_iters"
    iterations = config.max_iters
    t0 = time.perf_counter()

    def record(k, rel, obj_val):
        trace.k.append(k)
        trace.relative_error.append(rel)
        trace.balancing_norm.append(balancing_norm(f))
        trace.objective.append(obj_val)
        if config.compute_dist:
            try:
                d = dist(f, f_star)
            except AlignmentDegenerateError:
                d = float("nan")
            trace.dist_to_truth.append(d)
        trace.seconds.append(time.perf_counter() - t0)
        if factors is not None:
            factors.append(f)

    for k in range(config.max_iters + 1):
        rel = relative_error(f, gt.m_star)
        if k % config.record_every == 0 or k == config.max_iters:
            record(k, rel, objective(f, gt, mask, config.variant))
        if not np.isfinite(rel) or rel > DIVERGENCE_REL_ERR:
            status, iterations = "diverged", k
            break
        if rel < config.tol:
            status, iterations = "converged", k
            break
        if k == config.max_iters:
            break
        f = step(f, gradient(f, gt, mask, config.variant), config.step)

    # Make sure the terminal iterate is always on the trace.
    if trace.k[-1] != min(iterations, config.max_iters):
        record(min(iterations, config.max_iters),
               relative_error(f, gt.m_star),
               objective(f, gt, mask, config.variant))
    return RunResult(final=f, trace=trace, status=status,
                     iterations=iterations, factors=factors)
