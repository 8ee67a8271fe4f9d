"""Difference measurements between perturbed and jump-corrected degenerate solutions.

The comparison region excludes the initial layer: it starts at
``t0 = (eps/gamma)|ln eps|``.  On it we measure sup-norm differences of the
solutions and of their partial derivatives, and check that they shrink like
``eps |ln eps|`` across a ladder of eps values.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .characteristics import CharacteristicFan, build_fan
from .errors import (DegenerateSpacing, InsufficientDecay, InvalidParameter,
                     RegionEmpty)
from .expr import evaluate_on
from .interp import local_cubic
from .jumps import JumpMode, JumpPair, jump_consistency_defect, make_jumps
from .solver import (DEFAULT_FINE_DIVISOR, DEFAULT_H_COARSE, DEFAULT_LAYER_FACTOR,
                     Mesh, TrajectorySolution, build_mesh, solve_degenerate,
                     solve_perturbed)

BOUND_TOL = 0.25
TREND_SLACK = 0.10
NOISE_FLOOR = 1e-9
DEFAULT_EPS_LADDER = (1e-2, 3.16e-3, 1e-3, 3.16e-4)


def compute_t0(epsilon: float, gamma: float) -> float:
    if not 0 < epsilon < 1:
        raise InvalidParameter(f"epsilon must lie in (0, 1), got {epsilon}")
    if not gamma > 0:
        raise InvalidParameter("gamma must be positive")
    return epsilon / gamma * abs(math.log(epsilon))


@dataclass(frozen=True)
class RegionG1:
    t0: float
    t_end: float
    labels: np.ndarray


def region_g1(epsilon: float, gamma: float, t_end: float, labels) -> RegionG1:
    t0 = compute_t0(epsilon, gamma)
    if t0 >= t_end:
        raise RegionEmpty(f"t0 = {t0:.6g} >= t_end = {t_end}: epsilon too large")
    return RegionG1(t0, t_end, np.asarray(labels))


# -- partial derivatives ------------------------------------------------------

@dataclass(frozen=True)
class PartialField:
    t: np.ndarray
    X: np.ndarray  # (len(t), labels)
    y: np.ndarray
    y_t: np.ndarray
    y_x: np.ndarray


def partials_from_fields(p, t, X, Z, W) -> PartialField:
    """Invert ``H[y] = y_t + Q y_x`` given y and H[y] sampled on a fan.

    ``y_x`` comes from differences across neighbouring characteristics
    (central inside, one-sided at the two edge labels).
    """
    if X.shape[1] < 3:
        raise InvalidParameter("need at least 3 characteristics")
    dX = np.empty_like(X)
    dZ = np.empty_like(Z)
    dX[:, 1:-1] = X[:, 2:] - X[:, :-2]
    dZ[:, 1:-1] = Z[:, 2:] - Z[:, :-2]
    dX[:, 0], dZ[:, 0] = X[:, 1] - X[:, 0], Z[:, 1] - Z[:, 0]
    dX[:, -1], dZ[:, -1] = X[:, -1] - X[:, -2], Z[:, -1] - Z[:, -2]
    if np.any(np.abs(dX) < 1e-12):
        raise DegenerateSpacing("neighbouring characteristics closer than 1e-12")
    y_x = dZ / dX
    T = np.broadcast_to(np.asarray(t)[:, None], X.shape)
    Q = evaluate_on(p.spec.Q, X.shape, t=T, x=X)
    return PartialField(np.asarray(t), X, Z, W - Q * y_x, y_x)


def _stack(solutions: Sequence[TrajectorySolution], attr: str) -> np.ndarray:
    return np.column_stack([getattr(s, attr) for s in solutions])


def reconstruct_partials(solutions: Sequence[TrajectorySolution],
                         fan: CharacteristicFan | None, p) -> PartialField:
    if fan is not None and len(solutions) != fan.count:
        raise InvalidParameter("one solution per characteristic expected")
    t = solutions[0].t
    if any(len(s.t) != len(t) or np.any(s.t != t) for s in solutions):
        raise InvalidParameter("solutions must share one time grid")
    return partials_from_fields(p, t, _stack(solutions, "x"),
                                _stack(solutions, "z"), _stack(solutions, "w"))


# -- difference report ---------------------------------------------------------

@dataclass
class DifferenceReport:
    epsilon: float
    t0: float
    sup_y: float
    sup_yt: float
    sup_yx: float
    defect: float
    w_at_t0: float
    matching: float  # max over labels of |y0(t0) - y(t0)|, not imposed
    gamma: float
    # max-over-labels profiles on the comparison grid, for the clause checks
    t: np.ndarray = field(repr=False, default=None)
    diff_y: np.ndarray = field(repr=False, default=None)
    diff_yt: np.ndarray = field(repr=False, default=None)
    diff_yx: np.ndarray = field(repr=False, default=None)

    @property
    def eps_log(self) -> float:
        return self.epsilon * abs(math.log(self.epsilon))

    @property
    def ratio(self) -> float:
        return self.sup_y / self.eps_log

    @property
    def base_bound(self) -> float:
        """Shape of the first bound without its constant."""
        return self.eps_log + self.epsilon * self.w_at_t0 + self.defect

    def layer_bound(self) -> np.ndarray:
        """Shape of the derivative bounds along the comparison grid."""
        decay = np.exp(-self.gamma / self.epsilon * (self.t - self.t0))
        return self.base_bound + (1.0 + self.w_at_t0) * decay

    def as_row(self) -> dict:
        return {"epsilon": self.epsilon, "t0": self.t0, "sup_y": self.sup_y,
                "sup_yt": self.sup_yt, "sup_yx": self.sup_yx, "defect": self.defect,
                "w_at_t0": self.w_at_t0, "ratio": self.ratio}


def difference_report(p, fan: CharacteristicFan,
                      perturbed: Sequence[TrajectorySolution],
                      degenerate: Sequence[TrajectorySolution],
                      jumps: JumpPair | None, epsilon: float,
                      gamma: float | None = None) -> DifferenceReport:
    """Sup-norm differences on the region ``t >= t0``.

    Degenerate values are moved onto the perturbed nodes by local cubic
    interpolation in t.
    """
    gamma = p.gamma if gamma is None else gamma
    t_end = perturbed[0].t[-1]
    region = region_g1(epsilon, gamma, t_end, fan.labels)
    t = perturbed[0].t
    i0 = int(np.searchsorted(t, region.t0 * (1 - 1e-12)))
    tg = t[i0:]

    pert = reconstruct_partials(perturbed, fan, p)
    Xg = pert.X[i0:]
    Z0 = local_cubic(degenerate[0].t, _stack(degenerate, "z"), tg)
    W0 = local_cubic(degenerate[0].t, _stack(degenerate, "w"), tg)
    deg = partials_from_fields(p, tg, Xg, Z0, W0)

    dy = np.abs(pert.y[i0:] - deg.y).max(axis=1)
    dyt = np.abs(pert.y_t[i0:] - deg.y_t).max(axis=1)
    dyx = np.abs(pert.y_x[i0:] - deg.y_x).max(axis=1)
    defect = 0.0 if jumps is None else jump_consistency_defect(p, fan, jumps)
    return DifferenceReport(
        epsilon=epsilon, t0=region.t0,
        sup_y=float(dy.max()), sup_yt=float(dyt.max()), sup_yx=float(dyx.max()),
        defect=defect,
        w_at_t0=float(np.abs(_stack(perturbed, "w")[i0]).max()),
        matching=float(dy[0]), gamma=gamma,
        t=tg, diff_y=dy, diff_yt=dyt, diff_yx=dyx)


def layer_decay_slope(report: DifferenceReport, width: float = 5.0) -> float:
    """Least-squares slope of ``ln|y_t - y0_t|`` over ``[t0, t0 + width*eps/gamma]``."""
    eps, gamma = report.epsilon, report.gamma
    sel = (report.t <= report.t0 + width * eps / gamma) & (report.diff_yt > 0)
    if np.count_nonzero(sel) < 5:
        raise InsufficientDecay("fewer than 5 points with a nonzero derivative difference")
    slope, _ = np.polyfit(report.t[sel], np.log(report.diff_yt[sel]), 1)
    return float(slope)


def fit_layer_decay(p, fan: CharacteristicFan, perturbed, degenerate, epsilon: float,
                    gamma: float | None = None) -> float:
    """Decay rate of the derivative difference just past ``t0``; about ``-gamma/eps``."""
    report = difference_report(p, fan, perturbed, degenerate, None, epsilon, gamma)
    return layer_decay_slope(report)


# -- full pipeline ---------------------------------------------------------------

@dataclass(frozen=True)
class SolverSettings:
    h_coarse: float = DEFAULT_H_COARSE
    fine_divisor: float = DEFAULT_FINE_DIVISOR
    layer_factor: float = DEFAULT_LAYER_FACTOR
    fan_size: int = 33
    char_step: float = 1e-3
    h_degenerate: float | None = None  # defaults to h_coarse

    def perturbed_mesh(self, epsilon: float, gamma: float, t_end: float) -> Mesh:
        return build_mesh(epsilon, gamma, t_end, self.h_coarse,
                          self.layer_factor, self.fine_divisor)

    def degenerate_mesh(self, t_end: float) -> Mesh:
        return build_mesh(None, 1.0, t_end, self.h_degenerate or self.h_coarse)


def _map(fn: Callable, items: list, workers: int) -> list:
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))  # map keeps input order


@dataclass
class Study:
    """Everything that does not depend on epsilon, computed once."""

    p: object
    fan: CharacteristicFan
    jumps: JumpPair
    degenerate: list[TrajectorySolution]
    settings: SolverSettings
    workers: int = 1

    @classmethod
    def prepare(cls, p, mode=JumpMode.PAPER_EQ15, settings: SolverSettings | None = None,
                workers: int = 1, delta0_expr=None, delta_expr=None) -> "Study":
        settings = settings or SolverSettings()
        fan = build_fan(p, settings.fan_size, settings.char_step)
        jumps = make_jumps(p, fan, mode, delta0_expr, delta_expr)
        mesh = settings.degenerate_mesh(p.spec.t_end)
        degenerate = _map(lambda ch: solve_degenerate(p, ch, jumps, mesh),
                          fan.characteristics, workers)
        return cls(p, fan, jumps, degenerate, settings, workers)

    def solve(self, epsilon: float) -> list[TrajectorySolution]:
        mesh = self.settings.perturbed_mesh(epsilon, self.p.gamma, self.p.spec.t_end)
        return _map(lambda ch: solve_perturbed(self.p, ch, epsilon, mesh),
                    self.fan.characteristics, self.workers)

    def report(self, epsilon: float, perturbed=None) -> DifferenceReport:
        perturbed = perturbed if perturbed is not None else self.solve(epsilon)
        return difference_report(self.p, self.fan, perturbed, self.degenerate,
                                 self.jumps, epsilon)


@dataclass
class ClauseVerdict:
    name: str
    fitted_K: float
    max_ratio: float
    ratios: list[float]
    bounded: bool
    trend_ok: bool

    @property
    def passed(self) -> bool:
        return self.bounded and self.trend_ok

    def as_dict(self) -> dict:
        return {"fitted_K": self.fitted_K, "max_ratio": self.max_ratio,
                "ratios": self.ratios, "bounded": self.bounded,
                "trend_ok": self.trend_ok, "pass": self.passed}


def _non_increasing(values: Sequence[float]) -> bool:
    return all(b <= (1 + TREND_SLACK) * a + NOISE_FLOOR for a, b in zip(values, values[1:]))


def _value_clause(rows: list[DifferenceReport]) -> ClauseVerdict:
    b = np.array([r.eps_log for r in rows])
    sup = np.array([r.sup_y for r in rows])
    K = max(0.0, float(sup @ b / (b @ b)))
    bound_ratio = [r.sup_y / r.base_bound for r in rows]
    trend = [r.ratio for r in rows]
    bounded = max(bound_ratio) <= K * (1 + BOUND_TOL) + NOISE_FLOOR
    return ClauseVerdict("y", K, max(bound_ratio), trend, bounded, _non_increasing(trend))


def _derivative_clause(rows: list[DifferenceReport], name: str, attr: str) -> ClauseVerdict:
    # smallest constant that makes the bound hold on each row's grid
    ratios = [float(np.max(getattr(r, attr) / r.layer_bound())) for r in rows]
    K = float(np.mean(ratios))
    bounded = max(ratios) <= K * (1 + BOUND_TOL) + NOISE_FLOOR
    return ClauseVerdict(name, K, max(ratios), ratios, bounded, _non_increasing(ratios))


@dataclass
class ConvergenceReport:
    rows: list[DifferenceReport]
    fitted_K: float
    ratio_trend: list[float]
    clauses: dict[str, ClauseVerdict]
    mode: JumpMode

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.clauses.values())

    @property
    def verdict(self) -> dict[str, bool]:
        return {name: c.passed for name, c in self.clauses.items()}

    def as_dict(self) -> dict:
        return {
            "jumps_mode": self.mode.value,
            "pass": self.passed,
            "fitted_K": self.fitted_K,
            "ratio_trend": self.ratio_trend,
            "clauses": {name: c.as_dict() for name, c in self.clauses.items()},
            "rows": [dict(r.as_row(), matching=r.matching) for r in self.rows],
        }


def assess(rows: list[DifferenceReport], mode: JumpMode) -> ConvergenceReport:
    if not rows:
        raise InvalidParameter("no rows to assess")
    clause_y = _value_clause(rows)
    clauses = {
        "y": clause_y,
        "y_t": _derivative_clause(rows, "y_t", "diff_yt"),
        "y_x": _derivative_clause(rows, "y_x", "diff_yx"),
    }
    return ConvergenceReport(rows, clause_y.fitted_K, clause_y.ratios, clauses, JumpMode(mode))


def convergence_study(p, mode=JumpMode.PAPER_EQ15,
                      eps_list: Sequence[float] = DEFAULT_EPS_LADDER,
                      settings: SolverSettings | None = None, workers: int = 1,
                      delta0_expr=None, delta_expr=None,
                      keep: dict | None = None) -> ConvergenceReport:
    """Run the pipeline for every eps and assess the three bounds.

    If ``keep`` is a dict, the perturbed fan solutions are stored in it by eps.
    """
    eps_list = [float(e) for e in eps_list]
    if not eps_list or any(not 0 < e < 1 for e in eps_list):
        raise InvalidParameter("eps values must lie in (0, 1)")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise InvalidParameter("eps list must be strictly decreasing")
    study = Study.prepare(p, mode, settings, workers, delta0_expr, delta_expr)
    rows = []
    for eps in eps_list:
        sols = study.solve(eps)
        if keep is not None:
            keep[eps] = sols
        rows.append(study.report(eps, sols))
    return assess(rows, mode)


def richardson_reference(solve: Callable[[Mesh], np.ndarray], mesh: Mesh,
                         order: int = 2) -> np.ndarray:
    """Extrapolate from the twice- and four-times-refined meshes back onto ``mesh``."""
    half = mesh.bisect()
    quarter = half.bisect()
    fine = np.asarray(solve(quarter))[::4]
    mid = np.asarray(solve(half))[::2]
    return fine + (fine - mid) / (2 ** order - 1)
