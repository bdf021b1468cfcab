"""Numeric verification of the convergence theory.

These checkers evaluate, along recorded runs, the inequalities the analysis
relies on: the per-step contraction factor, the five induction bounds with
their leave-one-out companion sequences, the drift of the norm-imbalance
term, and sampling-concentration spot checks. The unspecified constants of
the theory are set to 1, so reports carry slack values rather than
pass/fail theorem claims.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import frobenius_norm, spectral_norm
from .metrics import (AlignmentDegenerateError, gl_align, procrustes_align)
from .model import FactorPair
from .sampling import LooSelector, project
from .solvers import SolverConfig, SolverVariant, run
from .spectral import loo_init

__all__ = [
    "ContractionReport",
    "BalancingDriftReport",
    "HypothesisRow",
    "HypothesisReport",
    "LooFamily",
    "contraction_check",
    "balancing_drift_check",
    "concentration_check",
    "run_loo_family",
    "default_selectors",
    "hypothesis_check",
]

BALANCING_DRIFT_FACTOR = 7400.0
CONTRACTION_DENOMINATOR = 100.0


@dataclass
class ContractionReport:
    factor: float          # 1 - s*sigma_min/100
    ratios: np.ndarray     # dist_{k+1}/dist_k per step
    satisfied: np.ndarray  # per-step flags
    worst_ratio: float
    all_satisfied: bool


def contraction_check(dists, s, sigma_min):
    """Check dist_{k+1} <= (1 - s*sigma_min/100) * dist_k at every step."""
    dists = np.asarray(dists, dtype=np.float64)
    factor = 1.0 - s * sigma_min / CONTRACTION_DENOMINATOR
    if dists.size < 2:
        return ContractionReport(factor=factor, ratios=np.empty(0),
                                 satisfied=np.empty(0, dtype=bool),
                                 worst_ratio=0.0, all_satisfied=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = dists[1:] / dists[:-1]
    satisfied = dists[1:] <= factor * dists[:-1]
    finite = ratios[np.isfinite(ratios)]
    worst = float(np.max(finite)) if finite.size else 0.0
    return ContractionReport(factor=factor, ratios=ratios,
                             satisfied=satisfied, worst_ratio=worst,
                             all_satisfied=bool(np.all(satisfied)))


@dataclass
class BalancingDriftReport:
    initial: float
    initial_ok: bool       # starts at (numerically) zero imbalance
    bound: float           # 7400 * kappa * s * sigma_max * dist0^2
    max_drift: float
    drift_ok: bool


def balancing_drift_check(balancing_trace, kappa, s, sigma_max, dist0):
    """Check zero initial imbalance and the drift bound along a run."""
    trace = np.asarray(balancing_trace, dtype=np.float64)
    initial = float(trace[0])
    bound = BALANCING_DRIFT_FACTOR * kappa * s * sigma_max * dist0 ** 2
    max_drift = float(np.max(trace))
    return BalancingDriftReport(
        initial=initial,
        initial_ok=initial <= 1e-10 * sigma_max,
        bound=bound,
        max_drift=max_drift,
        drift_ok=max_drift <= bound)


def concentration_check(mask, p, trials, seed):
    """Worst observed ratio of |<(p^-1 P_Omega - I)(Xa Ya.T), Xb Yb.T>| to
    its concentration bound with the constant set to 1.

    A diagnostic (the theory's constant is unspecified), not a pass/fail.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    d1, d2 = mask.d1, mask.d2
    r = max(1, min(d1, d2) // 8)
    dmax = max(d1, d2)
    worst = 0.0
    for _ in range(trials):
        xa, xb = rng.standard_normal((2, d1, r))
        ya, yb = rng.standard_normal((2, d2, r))
        ma = xa @ ya.T
        lhs = abs(float(np.sum((project(ma, mask) / p - ma) * (xb @ yb.T))))
        row_norm = lambda m: float(np.max(np.linalg.norm(m, axis=1)))
        fro = lambda m: float(np.linalg.norm(m))
        rhs = (math.sqrt(dmax / p)
               * min(fro(xa) * row_norm(xb), row_norm(xa) * fro(xb))
               * min(fro(ya) * row_norm(yb), row_norm(ya) * fro(yb)))
        if lhs > 0 and rhs > 0:
            worst = max(worst, lhs / rhs)
    return worst


@dataclass
class LooFamily:
    """Leave-one-out runs aligned with a main run's recording stride."""

    selectors: tuple
    results: dict  # l -> RunResult with stored factors


def default_selectors(d1, d2, n_rows=4, n_cols=4):
    """Evenly spaced row and column selectors over 1..d1+d2."""
    rows = np.unique(np.linspace(1, d1, num=min(n_rows, d1), dtype=int))
    cols = np.unique(np.linspace(d1 + 1, d1 + d2, num=min(n_cols, d2),
                                 dtype=int))
    return tuple(LooSelector(int(l)) for l in np.concatenate([rows, cols]))


def run_loo_family(gt, mask, config, selectors):
    """Run the leave-one-out solver from its own spectral initialization for
    each selector, recording iterates at the given stride."""
    results = {}
    for sel in selectors:
        sel.validate(gt.d1, gt.d2)
        cfg = SolverConfig(variant=SolverVariant.leave_one_out(sel),
                           step=config.step, max_iters=config.max_iters,
                           tol=config.tol, record_every=config.record_every,
                           compute_dist=False, store_factors=True)
        init = loo_init(gt, mask, gt.r, sel)
        results[sel.l] = run(gt, mask, cfg, init)
    return LooFamily(selectors=tuple(selectors), results=results)


@dataclass
class HypothesisRow:
    k: int
    clause: str
    lhs: float
    rhs: float
    satisfied: bool
    evaluable: bool = True
    vacuous: bool = False

    @property
    def slack(self):
        return self.rhs - self.lhs


@dataclass
class HypothesisReport:
    rows: list = field(default_factory=list)

    @property
    def fraction_satisfied(self):
        ev = [r for r in self.rows if r.evaluable]
        if not ev:
            return float("nan")
        return sum(r.satisfied for r in ev) / len(ev)

    def clause_rows(self, clause):
        return [r for r in self.rows if r.clause == clause]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["k", "clause", "lhs", "rhs", "slack",
                             "satisfied"])
            for r in self.rows:
                writer.writerow([r.k, r.clause, repr(r.lhs), repr(r.rhs),
                                 repr(r.slack), int(r.satisfied)])


def _bounds(gt, s, p):
    """Right-hand sides of the five induction bounds (constants as printed,
    dimensions taken as max/min to cover either orientation)."""
    dmax, dmin = max(gt.d1, gt.d2), min(gt.d1, gt.d2)
    logd = math.log(dmax)
    mu, r, kap = gt.mu, gt.r, gt.kappa
    smax, smin = gt.sigma_max, gt.sigma_min
    rhs_a = (s * smin + math.sqrt(mu * r * kap ** 6 * logd / (p * dmin))) \
        * math.sqrt(smax)
    rhs_b = (1e3 * s * kap ** 2 * smin
             + 1e2 * math.sqrt(mu ** 2 * r ** 2 * kap ** 14 * logd
                               / (p * dmin))) * math.sqrt(mu * r * smax / dmin)
    rhs_c = (s * smin / kap
             + math.sqrt(mu ** 2 * r ** 2 * kap ** 10 * logd
                         / (p * dmin ** 2))) * math.sqrt(smax)
    rhs_e = 1.0 / (400.0 * kap)
    return rhs_a, rhs_b, rhs_c, rhs_e


def hypothesis_check(main, loo, gt, s, p):
    """Evaluate the five induction bounds along a recorded run.

    `main` must be a RunResult with stored factors and recorded dist;
    `loo` a LooFamily from the same instance and stride. Rows whose
    alignment fails are marked unevaluable rather than failed. A satisfied
    row is flagged vacuous when its bound exceeds the trivial scale
    ||F*||.
    """
    if main.factors is None:
        raise ValueError("main run must be executed with store_factors=True")
    f_star = gt.optimal_pair()
    f_star_stacked = f_star.stacked()
    scale = spectral_norm(f_star_stacked)
    rhs_a, rhs_b, rhs_c, rhs_e = _bounds(gt, s, p)
    factor = 1.0 - s * gt.sigma_min / CONTRACTION_DENOMINATOR

    common = set(main.trace.k)
    for res in loo.results.values():
        common &= set(res.trace.k)
    report = HypothesisReport()

    dist0 = main.trace.dist_to_truth[0] if main.trace.dist_to_truth else None
    for i, k in enumerate(main.trace.k):
        f_k = main.factors[i]
        stacked = f_k.stacked()
        o_k = procrustes_align(f_k, f_star)
        aligned = stacked @ o_k.matrix

        # (a) spectral-norm proximity of the aligned iterate.
        lhs_a = spectral_norm(aligned - f_star_stacked)
        report.rows.append(HypothesisRow(
            k=k, clause="a", lhs=lhs_a, rhs=rhs_a,
            satisfied=lhs_a <= rhs_a, vacuous=rhs_a > scale))

        # (b), (c): worst case over the leave-one-out family.
        if loo.selectors and k in common:
            lhs_b = 0.0
            lhs_c = 0.0
            evaluable = True
            for sel in loo.selectors:
                res = loo.results[sel.l]
                j = res.trace.k.index(k)
                f_l = res.factors[j]
                stacked_l = f_l.stacked()
                try:
                    o_l = procrustes_align(f_l, f_star)
                    row = (stacked_l @ o_l.matrix - f_star_stacked)[sel.l - 1]
                    lhs_b = max(lhs_b, float(np.linalg.norm(row)))
                    target = FactorPair(aligned[:gt.d1], aligned[gt.d1:])
                    r_l = procrustes_align(f_l, target)
                    lhs_c = max(lhs_c, frobenius_norm(
                        aligned - stacked_l @ r_l.matrix))
                except AlignmentDegenerateError:
                    evaluable = False
                    break
            report.rows.append(HypothesisRow(
                k=k, clause="b", lhs=lhs_b, rhs=rhs_b,
                satisfied=evaluable and lhs_b <= rhs_b,
                evaluable=evaluable, vacuous=rhs_b > scale))
            report.rows.append(HypothesisRow(
                k=k, clause="c", lhs=lhs_c, rhs=rhs_c,
                satisfied=evaluable and lhs_c <= rhs_c,
                evaluable=evaluable, vacuous=rhs_c > scale))

        # (d) linear decay of the aligned distance.
        if dist0 is not None:
            lhs_d = main.trace.dist_to_truth[i]
            rhs_d = factor ** k * dist0
            ok = np.isfinite(lhs_d) and lhs_d <= rhs_d
            report.rows.append(HypothesisRow(
                k=k, clause="d", lhs=float(lhs_d), rhs=float(rhs_d),
                satisfied=bool(ok), evaluable=bool(np.isfinite(lhs_d))))

        # (e) proximity of the invertible and orthogonal alignments.
        try:
            q_k = gl_align(f_k, f_star)
            lhs_e = spectral_norm(q_k.matrix - o_k.matrix)
            report.rows.append(HypothesisRow(
                k=k, clause="e", lhs=lhs_e, rhs=rhs_e,
                satisfied=lhs_e <= rhs_e, evaluable=q_k.converged))
        except AlignmentDegenerateError:
            report.rows.append(HypothesisRow(
                k=k, clause="e", lhs=float("nan"), rhs=rhs_e,
                satisfied=False, evaluable=False))
    return report
