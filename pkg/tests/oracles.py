"""Independent reference computations used by the tests.

Plain Python, ⊥ spelled ``None``; nothing here touches the package's
numpy kernels.
"""

from __future__ import annotations

import itertools
import math


def s_add(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return max(a, b)


def s_mul(a, b):
    if a is None or b is None:
        return None
    return a + b


def to_py(rows):
    """Nested lists with -inf -> None."""
    return [[None if (v is None or v == -math.inf) else v for v in row] for row in rows]


def from_py(rows):
    return [[-math.inf if v is None else v for v in row] for row in rows]


def matmul(a, b):
    n = len(a)
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = None
            for k in range(n):
                acc = s_add(acc, s_mul(a[i][k], b[k][j]))
            row.append(acc)
        out.append(row)
    return out


def matvec(a, x):
    out = []
    for row in a:
        acc = None
        for aij, xj in zip(row, x):
            acc = s_add(acc, s_mul(aij, xj))
        out.append(acc)
    return out


def path_product(seq):
    """``seq[-1] ... seq[0]`` by enumerating index paths (entry (i, j): paths from j)."""
    d = len(seq[0])
    n = len(seq)
    out = [[None] * d for _ in range(d)]
    for path in itertools.product(range(d), repeat=n + 1):
        # path[0] = start j, path[n] = end i; step t uses seq[t][path[t+1]][path[t]]
        w = 0
        for t in range(n):
            w = s_mul(w, seq[t][path[t + 1]][path[t]])
            if w is None:
                break
        out[path[n]][path[0]] = s_add(out[path[n]][path[0]], w)
    return out


def closure(adj):
    """Reflexive-transitive closure (Warshall) of a boolean adjacency list."""
    d = len(adj)
    r = [[adj[i][j] or i == j for j in range(d)] for i in range(d)]
    for k in range(d):
        for i in range(d):
            if r[i][k]:
                for j in range(d):
                    if r[k][j]:
                        r[i][j] = True
    return r


def sccs(adj):
    """Components from mutual reachability, sorted by smallest node."""
    r = closure(adj)
    d = len(adj)
    seen, comps = set(), []
    for i in range(d):
        if i in seen:
            continue
        c = tuple(j for j in range(d) if r[i][j] and r[j][i])
        seen.update(c)
        comps.append(c)
    return sorted(comps)


def max_cycle_mean(a):
    """Best mean weight over elementary cycles, by direct enumeration."""
    d = len(a)
    best = None
    for k in range(1, d + 1):
        for cyc in itertools.permutations(range(d), k):
            if cyc[0] != min(cyc):
                continue
            w = 0
            for t in range(k):
                w = s_mul(w, a[cyc[(t + 1) % k]][cyc[t]])
            if w is not None:
                best = w / k if best is None else max(best, w / k)
    return best
