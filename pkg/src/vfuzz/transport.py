"""Exact transportation simplex and a brute-force oracle for it.

The solver works on basic spanning trees of the bipartite supply/demand
graph, starting from the northwest-corner basis and pivoting with Bland's
rule.  Everything is ``Fraction``-valued, so the returned potentials are an
exact certificate: they are dual feasible and their objective equals the
primal cost.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence


class TransportError(ValueError):
    pass


@dataclass(frozen=True)
class TransportResult:
    cost: Fraction
    plan: tuple      # m x n coupling
    u: tuple         # row potentials
    v: tuple         # column potentials
    pivots: int = 0

    def dual_value(self, supply, demand) -> Fraction:
        return (sum((Fraction(a) * u for a, u in zip(supply, self.u)), Fraction(0))
                + sum((Fraction(b) * v for b, v in zip(demand, self.v)), Fraction(0)))


def _validate(supply, demand, cost):
    supply = [Fraction(a) for a in supply]
    demand = [Fraction(b) for b in demand]
    if not supply or not demand:
        raise TransportError("empty support")
    if any(a <= 0 for a in supply) or any(b <= 0 for b in demand):
        raise TransportError("masses must be positive")
    if sum(supply) != sum(demand):
        raise TransportError(f"unbalanced masses {sum(supply)} vs {sum(demand)}")
    cost = [[Fraction(c) for c in row] for row in cost]
    if len(cost) != len(supply) or any(len(r) != len(demand) for r in cost):
        raise TransportError("cost matrix shape does not match the supports")
    return supply, demand, cost


def _potentials(m, n, basis, cost):
    """Solve ``u_i + v_j = c_ij`` on the basic tree with ``u_0 = 0``."""
    adj_r = [[] for _ in range(m)]
    adj_c = [[] for _ in range(n)]
    for i, j in basis:
        adj_r[i].append(j)
        adj_c[j].append(i)
    u = [None] * m
    v = [None] * n
    u[0] = Fraction(0)
    stack = [("r", 0)]
    while stack:
        kind, k = stack.pop()
        if kind == "r":
            for j in adj_r[k]:
                if v[j] is None:
                    v[j] = cost[k][j] - u[k]
                    stack.append(("c", j))
        else:
            for i in adj_c[k]:
                if u[i] is None:
                    u[i] = cost[i][k] - v[k]
                    stack.append(("r", i))
    if any(x is None for x in u) or any(x is None for x in v):
        raise TransportError("basis is not a spanning tree")  # pragma: no cover
    return u, v


def _cycle(m, n, basis, enter):
    """The unique cycle created by adding ``enter`` to the basic tree, as a
    list of cells starting with ``enter`` and alternating +/-."""
    i0, j0 = enter
    adj = {}
    for i, j in basis:
        adj.setdefault(("r", i), []).append(("c", j))
        adj.setdefault(("c", j), []).append(("r", i))
    # path in the tree from column j0 to row i0
    start, goal = ("c", j0), ("r", i0)
    prev = {start: None}
    stack = [start]
    while stack:
        node = stack.pop()
        if node == goal:
            break
        for nb in adj.get(node, ()):
            if nb not in prev:
                prev[nb] = node
                stack.append(nb)
    path = []
    node = goal
    while node is not None:
        path.append(node)
        node = prev[node]
    # path runs row i0 -> ... -> column j0; consecutive nodes are basic cells
    cells = [enter]
    for a, b in zip(path, path[1:]):
        r, c = (a[1], b[1]) if a[0] == "r" else (b[1], a[1])
        cells.append((r, c))
    return cells


def solve_transport(supply: Sequence, demand: Sequence, cost) -> TransportResult:
    """Minimise ``sum c_ij x_ij`` over couplings of ``supply`` and ``demand``."""
    supply, demand, cost = _validate(supply, demand, cost)
    m, n = len(supply), len(demand)
    x = {}
    r, c = supply[:], demand[:]
    i = j = 0
    while True:
        q = min(r[i], c[j])
        x[(i, j)] = q
        r[i] -= q
        c[j] -= q
        if i == m - 1 and j == n - 1:
            break
        if r[i] == 0 and i < m - 1:
            i += 1
        else:
            j += 1
    basis = set(x)
    pivots = 0
    while True:
        u, v = _potentials(m, n, basis, cost)
        enter = None
        for i in range(m):
            for j in range(n):
                if (i, j) not in basis and cost[i][j] - u[i] - v[j] < 0:
                    enter = (i, j)
                    break
            if enter:
                break
        if enter is None:
            break
        cyc = _cycle(m, n, basis, enter)
        minus = cyc[1::2]
        theta = min(x[cell] for cell in minus)
        leave = min(cell for cell in minus if x[cell] == theta)
        for k, cell in enumerate(cyc):
            x[cell] = x.get(cell, Fraction(0)) + (theta if k % 2 == 0 else -theta)
        basis.add(enter)
        basis.discard(leave)
        del x[leave]
        pivots += 1
    plan = tuple(tuple(x.get((i, j), Fraction(0)) for j in range(n)) for i in range(m))
    total = sum((cost[i][j] * plan[i][j] for i in range(m) for j in range(n)), Fraction(0))
    return TransportResult(total, plan, tuple(u), tuple(v), pivots)


def brute_force_transport(supply: Sequence, demand: Sequence, cost) -> Fraction:
    """Optimal cost by exhaustive search over vertex-generating sequences.

    Every vertex of the transportation polytope has a forest support with a
    leaf, whose flow equals the smaller of its remaining row and column
    mass.  Saturating some cell in this way and recursing therefore reaches
    every vertex, and every such sequence ends in a feasible coupling.
    """
    supply, demand, cost = _validate(supply, demand, cost)
    m, n = len(supply), len(demand)

    @lru_cache(maxsize=None)
    def best(rows: tuple, cols: tuple) -> Fraction:
        live_r = [i for i in range(m) if rows[i] > 0]
        live_c = [j for j in range(n) if cols[j] > 0]
        if not live_r:
            return Fraction(0)
        out = None
        for i in live_r:
            for j in live_c:
                q = min(rows[i], cols[j])
                nr = rows[:i] + (rows[i] - q,) + rows[i + 1:]
                nc = cols[:j] + (cols[j] - q,) + cols[j + 1:]
                val = q * cost[i][j] + best(nr, nc)
                if out is None or val < out:
                    out = val
        return out

    return best(tuple(supply), tuple(demand))


def check_certificate(supply, demand, cost, res: TransportResult) -> bool:
    """Primal feasibility, dual feasibility and equal objectives, exactly."""
    supply, demand, cost = _validate(supply, demand, cost)
    m, n = len(supply), len(demand)
    P = res.plan
    if any(P[i][j] < 0 for i in range(m) for j in range(n)):
        return False
    if any(sum(P[i]) != supply[i] for i in range(m)):
        return False
    if any(sum(P[i][j] for i in range(m)) != demand[j] for j in range(n)):
        return False
    if any(res.u[i] + res.v[j] > cost[i][j] for i in range(m) for j in range(n)):
        return False
    primal = sum((cost[i][j] * P[i][j] for i in range(m) for j in range(n)), Fraction(0))
    return primal == res.cost == res.dual_value(supply, demand)
