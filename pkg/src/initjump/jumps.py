"""Initial jumps of the solution and of the integral term.

Crossing the initial layer the solution picks up the offset
``Delta0 = pi1(psi) / A(0, psi)``; the memory term then carries
``Delta(t) = Delta0 * K1(t, 0, phi(t))``.  Both are sampled on the fan: one
``Delta0`` per label, ``Delta`` on the fan's shared time grid.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .characteristics import CharacteristicFan
from .expr import Expression, evaluate_on, parse
from .interp import local_cubic


class JumpMode(str, enum.Enum):
    PAPER_EQ15 = "paper"
    CUSTOM = "custom"
    ZERO = "zero"


@dataclass(frozen=True)
class JumpPair:
    labels: np.ndarray
    delta0: np.ndarray  # one value per label
    t: np.ndarray
    delta: np.ndarray  # shape (len(t), len(labels))
    mode: JumpMode

    def _column(self, label: float) -> int:
        j = int(np.argmin(np.abs(self.labels - label)))
        if not np.isclose(self.labels[j], label, rtol=0, atol=1e-12):
            raise KeyError(f"label {label} is not on the fan")
        return j

    def delta0_at(self, label: float) -> float:
        return float(self.delta0[self._column(label)])

    def delta_at(self, label: float, t) -> np.ndarray:
        """Delta along one characteristic, interpolated off the fan grid."""
        col = self.delta[:, self._column(label)]
        return local_cubic(self.t, col, t)


def compute_delta0(p, label: float) -> float:
    # the label is the first integral psi, so no back-tracing is needed
    spec = p.spec
    return spec.pi1(x=label) / spec.A(t=0.0, x=label)


def kernel_at_start(p, fan: CharacteristicFan) -> np.ndarray:
    """``K1(t, 0, phi(t; label))`` on the fan grid."""
    T = np.broadcast_to(fan.t[:, None], fan.X.shape)
    return evaluate_on(p.spec.K1, fan.X.shape, t=T, s=0.0, x=fan.X)


def compute_delta(p, fan: CharacteristicFan, delta0) -> JumpPair:
    d0 = np.broadcast_to(np.asarray(delta0, dtype=float), fan.labels.shape).copy()
    delta = kernel_at_start(p, fan) * d0[None, :]
    return JumpPair(fan.labels, d0, fan.t, delta, JumpMode.PAPER_EQ15)


def paper_jumps(p, fan: CharacteristicFan) -> JumpPair:
    d0 = np.array([compute_delta0(p, lab) for lab in fan.labels])
    return compute_delta(p, fan, d0)


def zero_jumps(fan: CharacteristicFan) -> JumpPair:
    return JumpPair(fan.labels, np.zeros(fan.count), fan.t,
                    np.zeros(fan.X.shape), JumpMode.ZERO)


def custom_jumps(fan: CharacteristicFan, delta0_expr: Expression | str,
                 delta_expr: Expression | str) -> JumpPair:
    """User-given jumps: ``delta0_expr`` in x, ``delta_expr`` in (t, x) on the characteristic."""
    d0e = delta0_expr if isinstance(delta0_expr, Expression) else parse(delta0_expr)
    de = delta_expr if isinstance(delta_expr, Expression) else parse(delta_expr)
    d0 = evaluate_on(d0e, fan.labels.shape, x=fan.labels)
    T = np.broadcast_to(fan.t[:, None], fan.X.shape)
    delta = evaluate_on(de, fan.X.shape, t=T, x=fan.X)
    return JumpPair(fan.labels, d0, fan.t, delta, JumpMode.CUSTOM)


def make_jumps(p, fan: CharacteristicFan, mode: JumpMode | str,
               delta0_expr=None, delta_expr=None) -> JumpPair:
    mode = JumpMode(mode)
    if mode is JumpMode.PAPER_EQ15:
        return paper_jumps(p, fan)
    if mode is JumpMode.ZERO:
        return zero_jumps(fan)
    return custom_jumps(fan, delta0_expr or "0", delta_expr or "0")


def jump_consistency_defect(p, fan: CharacteristicFan, jumps: JumpPair) -> float:
    """``max |K1(t, 0, x) * Delta0 - Delta(t, x)|`` over the fan grid."""
    k1 = kernel_at_start(p, fan)
    return float(np.max(np.abs(k1 * jumps.delta0[None, :] - jumps.delta)))
