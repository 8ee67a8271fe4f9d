"""Trajectory solvers for the perturbed and the degenerate integro-differential problems.

Along a characteristic ``x = phi(t; label)`` the operator ``H`` becomes
``d/dt``.  Writing ``z = y`` and ``w = H[y]`` the perturbed problem reads

    z' = w,   eps * w' = -A w - B z + F + I(t),
    z(0) = pi0(label),   eps * w(0) = pi1(label),

with the Volterra term ``I(t) = int_0^t K1(t,s,phi(t)) w(s) + K0(t,s,phi(t)) z(s) ds``:
the history of z, w is taken along the same characteristic while the kernels
see the current position ``phi(t)``, as in ``K1(t, 0, phi(t))`` of the jump
term.  The degenerate problem drops
``eps * w'`` and adds the jump terms:

    A w + B z = F + Delta(t) + I(t),   z' = w,   z(0) = pi0 + Delta0.

Both are advanced with the implicit trapezoidal rule.  The equations are
linear, so every step is a closed-form 2x2 solve; the unknown endpoint of the
trapezoidal Volterra sum (weight h/2) is folded into that system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .characteristics import Characteristic
from .errors import DegenerateRoots, InvalidParameter, NonFiniteState, SingularStep
from .expr import evaluate_on

SINGULAR_TOL = 1e-12
DEFAULT_H_COARSE = 1e-2
DEFAULT_LAYER_FACTOR = 3.0
DEFAULT_FINE_DIVISOR = 10.0


@dataclass(frozen=True)
class Mesh:
    nodes: np.ndarray
    fine_region_end: float
    h_fine: float
    h_coarse: float

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def t_end(self) -> float:
        return float(self.nodes[-1])

    def bisect(self) -> "Mesh":
        """Insert every interval midpoint; old nodes sit at the even indices."""
        mid = 0.5 * (self.nodes[:-1] + self.nodes[1:])
        nodes = np.empty(2 * len(self.nodes) - 1)
        nodes[0::2] = self.nodes
        nodes[1::2] = mid
        return Mesh(nodes, self.fine_region_end, self.h_fine / 2, self.h_coarse / 2)


def _uniform(a: float, b: float, h: float) -> np.ndarray:
    n = max(1, math.ceil((b - a) / h * (1 - 1e-12)))
    out = a + (b - a) * np.arange(n + 1) / n
    out[-1] = b
    return out


def build_mesh(epsilon: float | None, gamma: float, t_end: float,
               h_coarse: float = DEFAULT_H_COARSE,
               layer_factor: float = DEFAULT_LAYER_FACTOR,
               fine_divisor: float = DEFAULT_FINE_DIVISOR) -> Mesh:
    """Uniform mesh for the degenerate problem, layer-graded mesh otherwise.

    In the perturbed case the layer ``[0, layer_factor * t0]``,
    ``t0 = (eps/gamma)|ln eps|``, is resolved with ``h_fine = min(h_coarse,
    eps/fine_divisor)``.  ``t0`` itself is always a node so that the region
    ``t >= t0`` starts exactly on the grid.
    """
    if not h_coarse > 0 or not t_end > 0:
        raise InvalidParameter("h_coarse and t_end must be positive")
    if epsilon is None:
        return Mesh(_uniform(0.0, t_end, h_coarse), 0.0, h_coarse, h_coarse)
    if not epsilon > 0 or not gamma > 0:
        raise InvalidParameter("epsilon and gamma must be positive")
    if not layer_factor > 0 or not fine_divisor > 0:
        raise InvalidParameter("layer_factor and fine_divisor must be positive")

    t0 = epsilon / gamma * abs(math.log(epsilon))
    fine_end = min(t_end, layer_factor * t0)
    h_fine = min(h_coarse, epsilon / fine_divisor)
    breaks = sorted({0.0, min(t0, fine_end), fine_end, t_end})
    parts = [np.array([0.0])]
    for a, b in zip(breaks[:-1], breaks[1:]):
        if b - a <= 1e-15 * t_end:
            continue
        h = h_fine if b <= fine_end else h_coarse
        parts.append(_uniform(a, b, h)[1:])
    return Mesh(np.concatenate(parts), fine_end, h_fine, h_coarse)


@dataclass(frozen=True)
class TrajectorySolution:
    label: float
    epsilon: float | None  # None marks a degenerate solution
    mesh: Mesh
    z: np.ndarray
    w: np.ndarray
    x: np.ndarray  # characteristic abscissae at the mesh nodes
    volterra: np.ndarray  # I(t) at the mesh nodes

    @property
    def t(self) -> np.ndarray:
        return self.mesh.nodes

    @property
    def degenerate(self) -> bool:
        return self.epsilon is None


class VolterraHistory:
    """Trapezoidal product quadrature of the memory term along one characteristic.

    Keeps the full history (O(n^2) work overall).  ``split(n)`` returns the
    part of ``I(t_n)`` fixed by the stored history and the two coefficients
    that multiply the still unknown ``w_n`` and ``z_n``.
    """

    def __init__(self, p, t: np.ndarray, x: np.ndarray):
        spec = p.spec
        self.K0, self.K1 = spec.K0, spec.K1
        self.vanish = spec.kernels_vanish
        self.t = t
        self.x = x
        dt = np.diff(t)
        self.dt = dt
        # trapezoid weight of node j for an integral extending past t_j
        self.inner = 0.5 * (np.concatenate([[0.0], dt]) + np.append(dt, 0.0))
        self.z = np.zeros(len(t))
        self.w = np.zeros(len(t))

    def record(self, n: int, z: float, w: float) -> None:
        self.z[n] = z
        self.w[n] = w

    def split(self, n: int) -> tuple[float, float, float]:
        if self.vanish or n == 0:
            return 0.0, 0.0, 0.0
        s = self.t[: n + 1]
        k1 = evaluate_on(self.K1, s.shape, t=self.t[n], s=s, x=self.x[n])
        k0 = evaluate_on(self.K0, s.shape, t=self.t[n], s=s, x=self.x[n])
        wq = self.inner[:n]
        known = float(wq @ (k1[:n] * self.w[:n] + k0[:n] * self.z[:n]))
        half = 0.5 * self.dt[n - 1]
        return known, half * k1[n], half * k0[n]


def _coefficients(p, t: np.ndarray, x: np.ndarray):
    spec = p.spec
    return tuple(evaluate_on(e, t.shape, t=t, x=x) for e in (spec.A, spec.B, spec.F))


def _along(p, char: Characteristic, mesh: Mesh):
    t = mesh.nodes
    x = np.asarray(char.x_at(t), dtype=float)
    return (t, x) + _coefficients(p, t, x)


def _solve2(a11, a12, a21, a22, b1, b2, t):
    det = a11 * a22 - a12 * a21
    scale = max(abs(a11 * a22), abs(a12 * a21), 1e-300)
    if abs(det) <= SINGULAR_TOL * scale:
        raise SingularStep(f"singular step matrix at t={t:.6g} (det={det:.3g})")
    return (b1 * a22 - a12 * b2) / det, (a11 * b2 - b1 * a21) / det


def _check_finite(z, w, t):
    if not (math.isfinite(z) and math.isfinite(w)):
        raise NonFiniteState(f"non-finite state at t={t:.6g}")


def solve_perturbed(p, char: Characteristic, epsilon: float, mesh: Mesh) -> TrajectorySolution:
    if not epsilon > 0:
        raise InvalidParameter("epsilon must be positive")
    t, x, A, B, F = _along(p, char, mesh)
    label = char.label
    z0 = p.spec.pi0(x=label)
    w0 = p.spec.pi1(x=label) / epsilon
    hist = VolterraHistory(p, t, x)
    z = np.empty(len(t))
    w = np.empty(len(t))
    vol = np.zeros(len(t))
    z[0], w[0] = z0, w0
    hist.record(0, z0, w0)
    try:
        for n in range(len(t) - 1):
            h2 = 0.5 * (t[n + 1] - t[n])
            g = -A[n] * w[n] - B[n] * z[n] + F[n] + vol[n]
            known, c1, c0 = hist.split(n + 1)
            z1, w1 = _solve2(
                1.0, -h2,
                h2 * (B[n + 1] - c0), epsilon + h2 * (A[n + 1] - c1),
                z[n] + h2 * w[n],
                epsilon * w[n] + h2 * (g + F[n + 1] + known),
                t[n + 1])
            _check_finite(z1, w1, t[n + 1])
            z[n + 1], w[n + 1] = z1, w1
            vol[n + 1] = known + c1 * w1 + c0 * z1
            hist.record(n + 1, z1, w1)
    except (SingularStep, NonFiniteState) as exc:
        exc.label, exc.epsilon = label, epsilon
        raise
    return TrajectorySolution(label, epsilon, mesh, z, w, x, vol)


def solve_degenerate(p, char: Characteristic, jumps, mesh: Mesh) -> TrajectorySolution:
    """Solve the reduced problem; ``jumps=None`` gives the naive problem without jumps."""
    t, x, A, B, F = _along(p, char, mesh)
    label = char.label
    if jumps is None:
        delta0, delta = 0.0, np.zeros(len(t))
    else:
        delta0 = jumps.delta0_at(label)
        delta = jumps.delta_at(label, t)
    hist = VolterraHistory(p, t, x)
    z = np.empty(len(t))
    w = np.empty(len(t))
    vol = np.zeros(len(t))
    z[0] = p.spec.pi0(x=label) + delta0
    w[0] = (F[0] + delta[0] - B[0] * z[0]) / A[0]
    hist.record(0, z[0], w[0])
    try:
        for n in range(len(t) - 1):
            h2 = 0.5 * (t[n + 1] - t[n])
            known, c1, c0 = hist.split(n + 1)
            z1, w1 = _solve2(
                1.0, -h2,
                B[n + 1] - c0, A[n + 1] - c1,
                z[n] + h2 * w[n],
                F[n + 1] + delta[n + 1] + known,
                t[n + 1])
            _check_finite(z1, w1, t[n + 1])
            z[n + 1], w[n + 1] = z1, w1
            vol[n + 1] = known + c1 * w1 + c0 * z1
            hist.record(n + 1, z1, w1)
    except (SingularStep, NonFiniteState) as exc:
        exc.label = label
        raise
    return TrajectorySolution(label, None, mesh, z, w, x, vol)


def solve_oracle_constant(A: float, B: float, F: float, pi0: float, pi1: float,
                          epsilon: float, t):
    """Closed-form ``(z, w)`` for constant coefficients and vanishing kernels.

    Solves ``eps z'' + A z' + B z = F`` with ``z(0) = pi0``, ``eps z'(0) = pi1``.
    """
    if not A > 0 or not epsilon > 0:
        raise InvalidParameter("oracle needs A > 0 and epsilon > 0")
    t = np.asarray(t, dtype=float)
    if B == 0:
        c2 = (epsilon * F - A * pi1) / (A * A)
        c1 = pi0 - c2
        decay = np.exp(-A / epsilon * t)
        z = F * t / A + c1 + c2 * decay
        w = F / A - A / epsilon * c2 * decay
    else:
        disc = A * A - 4 * epsilon * B
        if abs(disc) <= 1e-14 * A * A:
            raise DegenerateRoots(f"repeated root: A^2 = 4 eps B ({A}, {B}, {epsilon})")
        root = np.sqrt(complex(disc))
        m_fast = (-A - root) / (2 * epsilon)
        m_slow = (B / epsilon) / m_fast  # product of the roots, avoids cancellation
        zp = F / B
        c_slow = (pi1 / epsilon - m_fast * (pi0 - zp)) / (m_slow - m_fast)
        c_fast = pi0 - zp - c_slow
        e_slow = np.exp(m_slow * t)
        e_fast = np.exp(m_fast * t)
        z = np.real(zp + c_slow * e_slow + c_fast * e_fast)
        w = np.real(m_slow * c_slow * e_slow + m_fast * c_fast * e_fast)
    if z.ndim == 0:
        return float(z), float(w)
    return z, w


def volterra_direct(p, sol: TrajectorySolution) -> np.ndarray:
    """``I(t_n)`` recomputed from stored z, w by a fresh trapezoidal sum per node."""
    t, x = sol.t, sol.x
    out = np.zeros(len(t))
    if p.spec.kernels_vanish:
        return out
    for n in range(1, len(t)):
        s = t[: n + 1]
        k1 = evaluate_on(p.spec.K1, s.shape, t=t[n], s=s, x=x[n])
        k0 = evaluate_on(p.spec.K0, s.shape, t=t[n], s=s, x=x[n])
        out[n] = np.trapezoid(k1 * sol.w[: n + 1] + k0 * sol.z[: n + 1], s)
    return out


def integrated_residual(p, sol: TrajectorySolution) -> tuple[float, float]:
    """Residual of the perturbed equation integrated along the characteristic from 0 to t.

    Uses the integrated-by-parts form

        eps (w(t) - w(0)) + A z |_0^t - int (dA/ds - B) z ds
            - int F ds - int I ds = 0,

    with every integral a trapezoidal sum over the mesh and ``dA/ds`` the
    derivative of A along the characteristic by second-order differences.
    Returns ``(max |residual|, scale)``; scale is the largest term magnitude
    (at least 1).
    """
    if sol.degenerate:
        raise InvalidParameter("integrated residual applies to perturbed solutions")
    eps = sol.epsilon
    t = sol.t
    A, B, F = _coefficients(p, t, sol.x)
    dA = np.gradient(A, t, edge_order=2)
    vol = volterra_direct(p, sol)
    z, w = sol.z, sol.w

    def cum(f):
        return cumulative_trapezoid(f, t, initial=0.0)

    terms = [
        eps * (w - w[0]),
        A * z - A[0] * z[0],
        -cum((dA - B) * z),
        -cum(F),
        -cum(vol),
    ]
    residual = np.sum(terms, axis=0)
    scale = max(1.0, *(float(np.max(np.abs(term))) for term in terms))
    return float(np.max(np.abs(residual))), scale

