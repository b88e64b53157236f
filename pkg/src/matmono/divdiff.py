"""Divided differences with repeated nodes, Loewner and Kraus matrices.

The recursive tableau runs on sorted nodes; groups closer than the
coincidence threshold are routed to the exact derivative rule
f^(k)(t)/k!, which the function specs provide in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .funcmodel import FunctionSpec

COINCIDENCE_REL = 1e-8

__all__ = [
    "CriterionMatrix",
    "divided_difference",
    "loewner_matrix",
    "kraus_matrix",
    "local_criterion_matrix",
]


@dataclass(frozen=True)
class CriterionMatrix:
    """Symmetric criterion matrix together with its generating data."""

    kind: str                      # loewner | kraus | local_monotone | local_convex
    entries: np.ndarray
    nodes: tuple
    s: float | None = None


def _coincident(x: float, y: float) -> bool:
    return abs(x - y) <= COINCIDENCE_REL * max(1.0, abs(x), abs(y))


def divided_difference(f: FunctionSpec, nodes) -> float:
    """Divided difference [t_1,...,t_m]_f of order m-1, repeats allowed.

    Invariant under permutations of the nodes; a cluster of coincident
    pivots contributes f^(k)(t)/k! exactly.
    """
    ts = sorted(float(t) for t in nodes)
    m = len(ts)
    if m == 0:
        raise ValueError("need at least one node")
    jets = {}

    def jet(t, order):
        key = (t, order)
        if key not in jets:
            jets[key] = f.jet(t, order)
        return jets[key]

    col = [float(f(t)) for t in ts]
    for j in range(1, m):
        nxt = []
        for i in range(m - j):
            lo, hi = ts[i], ts[i + j]
            if _coincident(lo, hi):
                mid = sum(ts[i : i + j + 1]) / (j + 1)
                nxt.append(float(jet(mid, j)[j]))
            else:
                nxt.append((col[i + 1] - col[i]) / (hi - lo))
        col = nxt
    return col[0]


def loewner_matrix(f: FunctionSpec, nodes) -> CriterionMatrix:
    """Matrix of first divided differences [t_i, t_j]_f, f'(t_i) on the diagonal."""
    ts = np.asarray([float(t) for t in nodes])
    n = len(ts)
    vals = np.array([float(f(t)) for t in ts])
    entries = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            if _coincident(ts[i], ts[j]):
                mid = 0.5 * (ts[i] + ts[j])
                entries[i, j] = f.derivative(mid, 1)
            else:
                entries[i, j] = (vals[i] - vals[j]) / (ts[i] - ts[j])
            entries[j, i] = entries[i, j]
    return CriterionMatrix("loewner", entries, tuple(ts))


def kraus_matrix(f: FunctionSpec, nodes, s: float) -> CriterionMatrix:
    """Matrix of second divided differences [t_i, t_j, s]_f anchored at s."""
    ts = tuple(float(t) for t in nodes)
    s = float(s)
    n = len(ts)
    entries = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            entries[i, j] = divided_difference(f, (ts[i], ts[j], s))
            entries[j, i] = entries[i, j]
    return CriterionMatrix("kraus", entries, ts, s)


def local_criterion_matrix(f: FunctionSpec, t: float, kind: str) -> CriterionMatrix:
    """Pointwise 2x2 derivative criteria.

    ``local_convex`` is [[f''/2, f'''/6], [f'''/6, f''''/24]] and
    ``local_monotone`` is [[f', f''/2], [f''/2, f'''/6]]; both are plain
    Hankel windows of the Taylor jet at t.
    """
    t = float(t)
    if kind == "local_convex":
        j = f.jet(t, 4)
        entries = np.array([[j[2], j[3]], [j[3], j[4]]])
    elif kind == "local_monotone":
        j = f.jet(t, 3)
        entries = np.array([[j[1], j[2]], [j[2], j[3]]])
    else:
        raise ValueError(f"unknown local criterion kind {kind!r}")
    return CriterionMatrix(kind, entries, (t,))
