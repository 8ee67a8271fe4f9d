"""Problem definition and validation of the standing positivity assumptions."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .characteristics import DEFAULT_STEP, trace_labels
from .errors import InvalidParameter, PositivityViolation
from .expr import Expression, ExpressionError, evaluate_on, parse

log = logging.getLogger(__name__)

# which variables each coefficient may reference
ALLOWED_VARIABLES = {
    "Q": {"t", "x"},
    "A": {"t", "x"},
    "B": {"t", "x"},
    "F": {"t", "x"},
    "K0": {"t", "s", "x"},
    "K1": {"t", "s", "x"},
    "pi0": {"x"},
    "pi1": {"x"},
}
DEFAULT_GRID = (201, 201)


class VariableNotAllowed(ExpressionError):
    pass


def _as_expr(name: str, value) -> Expression:
    e = value if isinstance(value, Expression) else parse(str(value))
    extra = e.variables - ALLOWED_VARIABLES[name]
    if extra:
        allowed = ", ".join(sorted(ALLOWED_VARIABLES[name]))
        raise VariableNotAllowed(
            f"{name} = {e.source!r} uses {', '.join(sorted(extra))}; allowed: {allowed}")
    return e


@dataclass(frozen=True)
class ProblemSpec:
    """Coefficients of the perturbed Cauchy problem plus the domain geometry.

    Expressions may be passed as strings; they are parsed and checked against
    the variables each field may use.
    """

    Q: Expression
    A: Expression
    B: Expression
    F: Expression
    K0: Expression
    K1: Expression
    pi0: Expression
    pi1: Expression
    t_end: float = 1.0
    x0_interval: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        for name in ALLOWED_VARIABLES:
            object.__setattr__(self, name, _as_expr(name, getattr(self, name)))
        lo, hi = (float(v) for v in self.x0_interval)
        object.__setattr__(self, "x0_interval", (lo, hi))
        object.__setattr__(self, "t_end", float(self.t_end))
        if not self.t_end > 0:
            raise InvalidParameter("t_end must be positive")
        if not hi > lo:
            raise InvalidParameter(f"degenerate label interval [{lo}, {hi}]")

    @classmethod
    def create(cls, Q="1", A="1", B="0", F="0", K0="0", K1="0", pi0="0", pi1="0",
               t_end=1.0, x0_interval=(0.0, 1.0)) -> "ProblemSpec":
        return cls(Q, A, B, F, K0, K1, pi0, pi1, t_end, tuple(x0_interval))

    def replace(self, **changes) -> "ProblemSpec":
        fields = {name: getattr(self, name) for name in ALLOWED_VARIABLES}
        fields.update(t_end=self.t_end, x0_interval=self.x0_interval)
        fields.update(changes)
        return ProblemSpec(**fields)

    @property
    def kernels_vanish(self) -> bool:
        return all(k.is_constant and k() == 0.0 for k in (self.K0, self.K1))


@dataclass(frozen=True)
class ValidatedProblem:
    spec: ProblemSpec
    gamma: float
    sigma: float
    sample_grid: tuple[int, int]
    strip: tuple[float, float] = (0.0, 1.0)  # x-extent swept by G
    warnings: tuple[str, ...] = field(default=())


def sample_strip(spec: ProblemSpec, grid=DEFAULT_GRID, step: float = DEFAULT_STEP):
    """Tensor sample of the strip: t uniform, x uniform between the boundary characteristics."""
    nt, nx = grid
    t = np.linspace(0.0, spec.t_end, nt)
    edges = trace_labels(spec.Q, spec.x0_interval, spec.t_end, step)
    lo = edges[0].x_at(t)
    hi = edges[1].x_at(t)
    u = np.linspace(0.0, 1.0, nx)
    T = np.broadcast_to(t[:, None], (nt, nx))
    X = lo[:, None] + u[None, :] * (hi - lo)[:, None]
    return T, X


def validate(spec: ProblemSpec, grid=DEFAULT_GRID, strict: bool = True,
             step: float = DEFAULT_STEP) -> ValidatedProblem:
    """Sample A, Q, pi0, pi1 over the strip and report their infima as gamma, sigma.

    The infima are sampled, not exact.  ``A >= gamma > 0`` is always enforced
    since every later stage divides by A; the remaining conditions only raise
    in ``strict`` mode and are otherwise returned as warnings.
    """
    nt, nx = (int(g) for g in grid)
    if nt < 2 or nx < 2:
        raise InvalidParameter("sample grid needs at least 2 points per axis")
    T, X = sample_strip(spec, (nt, nx), step)

    def infimum(values):
        k = int(np.argmin(values))
        return float(values.flat[k]), (float(T.flat[k]), float(X.flat[k]))

    gamma, at = infimum(evaluate_on(spec.A, T.shape, t=T, x=X))
    if not gamma > 0:
        raise PositivityViolation("A", at, gamma)

    warnings = []
    sigma = np.inf
    for name in ("Q", "pi0", "pi1"):
        e = getattr(spec, name)
        value, where = infimum(evaluate_on(e, T.shape, t=T, x=X))
        sigma = min(sigma, value)
        if not value > 0:
            if strict:
                raise PositivityViolation(name, where, value)
            msg = f"{name} has sampled infimum {value:.6g} <= 0 at (t, x) = {where}"
            log.warning(msg)
            warnings.append(msg)

    return ValidatedProblem(spec, gamma, float(sigma), (nt, nx),
                            (float(X.min()), float(X.max())), tuple(warnings))
