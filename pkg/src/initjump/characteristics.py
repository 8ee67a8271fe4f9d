"""Characteristic curves of ``dx/dt = Q(t, x)`` and the strip they sweep.

Every characteristic is labelled by its starting abscissa ``x0`` at ``t = 0``;
the label is the value of the first integral ``psi(t, x)`` along the curve.
The domain of the problem is the strip between the characteristics through
``(0, x0_min)`` and ``(0, x0_max)``; the lower one is ``lambda(t)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter, NonFiniteState, OutOfStrip
from .expr import Expression, evaluate_on
from .interp import hermite_cubic

DEFAULT_STEP = 1e-3


def _spec(p):
    return getattr(p, "spec", p)


def time_grid(t_end: float, step: float) -> np.ndarray:
    """Uniform grid from 0 to ``t_end``; the last step is shortened to land on ``t_end``."""
    if step <= 0 or t_end <= 0:
        raise InvalidParameter("step and t_end must be positive")
    n = int(np.floor(t_end / step * (1 + 1e-12)))
    t = np.arange(n + 1) * step
    if t_end - t[-1] > 1e-12 * t_end:
        t = np.append(t, t_end)
    else:
        t[-1] = t_end
    return t


def _rk4(Q: Expression, t: np.ndarray, x0: np.ndarray) -> np.ndarray:
    """Classical RK4 for a vector of independent initial values along grid ``t``."""
    def f(tt, xx):
        return evaluate_on(Q, xx.shape, t=tt, x=xx)

    X = np.empty((len(t), len(x0)))
    X[0] = x0
    x = np.array(x0, dtype=float)
    for k in range(len(t) - 1):
        tk, h = t[k], t[k + 1] - t[k]
        k1 = f(tk, x)
        k2 = f(tk + h / 2, x + h / 2 * k1)
        k3 = f(tk + h / 2, x + h / 2 * k2)
        k4 = f(tk + h, x + h * k3)
        x = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(x)):
            raise NonFiniteState(f"characteristic left the finite range near t={t[k + 1]:.6g}")
        X[k + 1] = x
    return X


@dataclass(frozen=True)
class Characteristic:
    label: float
    t: np.ndarray
    x: np.ndarray
    slope: np.ndarray  # Q(t, x) at the nodes, i.e. dx/dt

    @property
    def nodes(self) -> np.ndarray:
        return np.column_stack([self.t, self.x])

    def x_at(self, t):
        """Dense output by cubic Hermite interpolation (4th order, like the tracer)."""
        return hermite_cubic(self.t, self.x, self.slope, t)


@dataclass(frozen=True)
class CharacteristicFan:
    labels: np.ndarray
    t: np.ndarray
    X: np.ndarray  # shape (len(t), len(labels)); column j is phi(t; labels[j])
    slopes: np.ndarray

    @property
    def count(self) -> int:
        return len(self.labels)

    @property
    def characteristics(self) -> list[Characteristic]:
        return [self[j] for j in range(self.count)]

    def __getitem__(self, j: int) -> Characteristic:
        return Characteristic(float(self.labels[j]), self.t, self.X[:, j], self.slopes[:, j])

    def x_at(self, t) -> np.ndarray:
        """Positions of every characteristic at times ``t``: shape (len(t), count)."""
        tq = np.atleast_1d(t)
        return np.column_stack([self[j].x_at(tq) for j in range(self.count)])

    def lower(self) -> Characteristic:
        """``lambda(t)``, the lowest-label characteristic."""
        return self[0]

    def upper(self) -> Characteristic:
        return self[self.count - 1]

    def is_ordered(self) -> bool:
        return bool(np.all(np.diff(self.X, axis=1) > 0))


def trace_labels(Q: Expression, labels, t_end: float, step: float = DEFAULT_STEP) -> CharacteristicFan:
    labels = np.asarray(labels, dtype=float)
    t = time_grid(t_end, step)
    X = _rk4(Q, t, labels)
    T = np.broadcast_to(t[:, None], X.shape)
    slopes = evaluate_on(Q, X.shape, t=T, x=X)
    return CharacteristicFan(labels, t, X, slopes)


def trace_forward(p, x0: float, step: float = DEFAULT_STEP) -> Characteristic:
    spec = _spec(p)
    lo, hi = spec.x0_interval
    if not lo - 1e-12 <= x0 <= hi + 1e-12:
        raise InvalidParameter(f"label {x0} outside the label interval [{lo}, {hi}]")
    return trace_labels(spec.Q, [x0], spec.t_end, step)[0]


def first_integral(p, t: float, x: float, step: float = DEFAULT_STEP,
                   tol: float = 1e-6) -> float:
    """``psi(t, x)``: trace back from ``(t, x)`` to ``t = 0`` and return the arrival abscissa."""
    spec = _spec(p)
    if t == 0:
        psi = float(x)
    else:
        # backward grid t -> 0 with the same shortened-last-step rule
        back = t - time_grid(t, step)
        psi = float(_rk4(spec.Q, back, np.array([x], dtype=float))[-1, 0])
    lo, hi = spec.x0_interval
    if psi < lo - tol or psi > hi + tol:
        raise OutOfStrip(f"({t}, {x}) traces back to {psi}, outside [{lo}, {hi}]")
    return psi


def build_fan(p, M: int, step: float = DEFAULT_STEP) -> CharacteristicFan:
    if M < 3:
        raise InvalidParameter("a fan needs at least 3 characteristics")
    spec = _spec(p)
    lo, hi = spec.x0_interval
    return trace_labels(spec.Q, np.linspace(lo, hi, M), spec.t_end, step)
