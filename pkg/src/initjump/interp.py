"""Local cubic interpolation on sorted, possibly nonuniform grids."""

from __future__ import annotations

import numpy as np


def local_cubic(nodes: np.ndarray, values: np.ndarray, t) -> np.ndarray:
    """Four-point Lagrange interpolation of ``values`` (first axis ↔ ``nodes``).

    The stencil is the two nodes on either side of ``t``, shifted inward at the
    ends of the grid.  Queries that hit a node return the stored value exactly.
    """
    nodes = np.asarray(nodes, dtype=float)
    values = np.asarray(values, dtype=float)
    tq = np.atleast_1d(np.asarray(t, dtype=float))
    n = len(nodes)
    if n < 4:
        raise ValueError("local cubic interpolation needs at least 4 nodes")

    idx = np.searchsorted(nodes, tq, side="right") - 1
    start = np.clip(idx - 1, 0, n - 4)
    out = np.zeros(tq.shape + values.shape[1:])
    for k in range(4):
        jk = start + k
        basis = np.ones_like(tq)
        for m in range(4):
            if m == k:
                continue
            jm = start + m
            basis = basis * (tq - nodes[jm]) / (nodes[jk] - nodes[jm])
        out += basis.reshape(basis.shape + (1,) * (values.ndim - 1)) * values[jk]

    hit = np.searchsorted(nodes, tq)
    hit = np.clip(hit, 0, n - 1)
    exact = nodes[hit] == tq
    out[exact] = values[hit[exact]]
    return out if np.ndim(t) else out[0]


def hermite_cubic(nodes: np.ndarray, values: np.ndarray, slopes: np.ndarray, t):
    """Piecewise cubic Hermite interpolation with known derivatives."""
    nodes = np.asarray(nodes, dtype=float)
    tq = np.atleast_1d(np.asarray(t, dtype=float))
    i = np.clip(np.searchsorted(nodes, tq, side="right") - 1, 0, len(nodes) - 2)
    h = nodes[i + 1] - nodes[i]
    u = (tq - nodes[i]) / h
    h00 = (1 + 2 * u) * (1 - u) ** 2
    h10 = u * (1 - u) ** 2
    h01 = u * u * (3 - 2 * u)
    h11 = u * u * (u - 1)
    out = (h00 * values[i] + h10 * h * slopes[i]
           + h01 * values[i + 1] + h11 * h * slopes[i + 1])
    return out if np.ndim(t) else float(out[0])
