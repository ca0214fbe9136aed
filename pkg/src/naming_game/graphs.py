"""Finite interaction networks and edge-type bookkeeping."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .model import State

VERTEX_TRANSITIVE = frozenset({"complete", "cycle", "torus2d"})


@dataclass(frozen=True)
class Graph:
    n_vertices: int
    edges: tuple[tuple[int, int], ...]
    family: str = "custom"
    size: int = 0
    adjacency: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = self.n_vertices
        if n < 2:
            raise ValueError("graph needs at least two vertices")
        seen = set()
        adj: list[list[int]] = [[] for _ in range(n)]
        for u, v in self.edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for {n} vertices")
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
            adj[u].append(v)
            adj[v].append(u)
        if not _connected(adj):
            raise ValueError("graph is not connected")
        object.__setattr__(self, "adjacency", tuple(tuple(a) for a in adj))

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        return np.ascontiguousarray(e[:, 0]), np.ascontiguousarray(e[:, 1])

    @property
    def spec(self) -> str:
        return f"{self.family}:{self.size}"

    @property
    def vertex_transitive(self) -> bool:
        return self.family in VERTEX_TRANSITIVE


def _connected(adj) -> bool:
    seen = [False] * len(adj)
    seen[0] = True
    todo = deque([0])
    while todo:
        u = todo.popleft()
        for v in adj[u]:
            if not seen[v]:
                seen[v] = True
                todo.append(v)
    return all(seen)


def complete(n: int) -> Graph:
    return Graph(n, tuple(combinations(range(n), 2)), "complete", n)


def cycle(n: int) -> Graph:
    if n < 3:
        raise ValueError("cycle needs at least 3 vertices")
    return Graph(n, tuple((i, i + 1) for i in range(n - 1)) + ((0, n - 1),), "cycle", n)


def path(n: int) -> Graph:
    return Graph(n, tuple((i, i + 1) for i in range(n - 1)), "path", n)


def torus2d(L: int) -> Graph:
    """L x L periodic square lattice, vertex (i, j) -> i * L + j.

    Edges are listed row-major, right neighbour before down neighbour. For
    L = 2 the periodic wrap would duplicate edges, so it is dropped.
    """
    if L < 2:
        raise ValueError("torus side must be at least 2")
    edges, seen = [], set()
    for i in range(L):
        for j in range(L):
            v = i * L + j
            for w in (i * L + (j + 1) % L, ((i + 1) % L) * L + j):
                e = (min(v, w), max(v, w))
                if e not in seen:
                    seen.add(e)
                    edges.append(e)
    return Graph(L * L, tuple(edges), "torus2d", L)


def from_edge_list(pairs, n_vertices: int | None = None) -> Graph:
    pairs = [(int(u), int(v)) for u, v in pairs]
    if n_vertices is None:
        n_vertices = 1 + max(max(p) for p in pairs)
    return Graph(n_vertices, tuple(pairs), "edges", n_vertices)


def parse_edge_list(text: str) -> Graph:
    """One ``u v`` pair of 0-based vertex indices per line; ``#`` comments."""
    pairs = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'u v', got {line!r}")
        pairs.append((int(parts[0]), int(parts[1])))
    if not pairs:
        raise ValueError("empty edge list")
    return from_edge_list(pairs)


BUILDERS = {"complete": complete, "cycle": cycle, "path": path, "torus2d": torus2d}


def from_spec(spec: str) -> Graph:
    """Build from ``family:size``; ``edges:<path>`` reads an edge-list file."""
    family, _, arg = spec.partition(":")
    family = family.strip().lower()
    if family == "edges":
        with open(arg) as fh:
            return parse_edge_list(fh.read())
    if family not in BUILDERS:
        raise ValueError(f"unknown graph family {family!r}")
    return BUILDERS[family](int(arg))


def edge_type_counts(states, g: Graph) -> np.ndarray:
    """Symmetric 3x3 matrix: ``e[X, Y]`` = number of edges joining X and Y.

    Off-diagonal entries are stored in both ``e[X, Y]`` and ``e[Y, X]``, so the
    edge total is the upper triangle including the diagonal.
    """
    s = np.asarray(states, dtype=np.int64)
    if s.shape != (g.n_vertices,):
        raise ValueError(f"configuration has {s.size} vertices, graph has {g.n_vertices}")
    u, v = g.edge_arrays()
    e = np.zeros((3, 3), dtype=np.int64)
    np.add.at(e, (s[u], s[v]), 1)
    e = e + e.T - np.diag(np.diag(e))
    return e


def complete_edge_type_counts(n_A: int, n_B: int, n_AB: int) -> np.ndarray:
    n = (n_A, n_AB, n_B)  # State code order
    e = np.zeros((3, 3), dtype=np.int64)
    for x in State:
        for y in State:
            e[x, y] = n[x] * (n[x] - 1) // 2 if x == y else n[x] * n[y]
    return e
