"""Graphs, graph-state targets and the max-degree depth bound."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .errors import DuplicateEdge, MalformedLine, SelfLoop, VertexOutOfRange
from .sweet import PhaseGrid, SweetState


@dataclass(frozen=True)
class Graph:
    n: int
    edges: frozenset[tuple[int, int]]

    @classmethod
    def from_edges(cls, n: int, edges) -> Graph:
        seen: set[tuple[int, int]] = set()
        for u, v in edges:
            if u == v:
                raise SelfLoop(f"self-loop on vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise VertexOutOfRange(f"edge ({u}, {v}) outside {n} vertices")
            e = (min(u, v), max(u, v))
            if e in seen:
                raise DuplicateEdge(f"edge {e} listed twice")
            seen.add(e)
        return cls(n, frozenset(seen))

    def degree(self, v: int) -> int:
        return sum(v in e for e in self.edges)

    def neighbours(self, v: int) -> list[int]:
        return sorted(b if a == v else a for a, b in self.edges if v in (a, b))

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)


# bipartition {0,1,2} | {3,4,5,6}, 10 edges, max degree 4
G7_EDGES = [(0, 3), (0, 4), (0, 5), (0, 6), (1, 3), (1, 4), (1, 5), (2, 4), (2, 5), (2, 6)]
G4_EDGES = [(0, 1), (1, 2), (2, 3), (0, 3)]


def square_graph() -> Graph:
    return Graph.from_edges(4, G4_EDGES)


def benchmark_g7() -> Graph:
    return Graph.from_edges(7, G7_EDGES)


def graph_state_target(g: Graph, grid: PhaseGrid) -> SweetState:
    """CZ along every edge applied to the uniform superposition."""
    if grid.M < 2:
        raise ValueError("graph states need M >= 2")
    n, half = g.n, grid.M // 2
    bits = [[(x >> (n - 1 - q)) & 1 for q in range(n)] for x in range(1 << n)]
    slots = []
    for x in range(1 << n):
        parity = sum(bits[x][i] & bits[x][j] for i, j in g.edges) & 1
        slots.append(((half * parity) << n) | x)
    return SweetState(n, grid, tuple(sorted(slots)))


def uniform_superposition(n: int, grid: PhaseGrid) -> SweetState:
    return SweetState(n, grid, tuple(range(1 << n)))


def is_bipartite(g: Graph) -> bool:
    colour: dict[int, int] = {}
    for start in range(g.n):
        if start in colour:
            continue
        colour[start] = 0
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in g.neighbours(u):
                if v not in colour:
                    colour[v] = 1 - colour[u]
                    queue.append(v)
                elif colour[v] == colour[u]:
                    return False
    return True


@dataclass(frozen=True)
class DepthBound:
    lower: int
    exact_if_bipartite: bool


def vizing_depth_bound(g: Graph) -> DepthBound:
    """Minimal CZ depth is the max degree or one more; exactly the max degree when bipartite."""
    delta = max((g.degree(v) for v in range(g.n)), default=0)
    return DepthBound(delta, is_bipartite(g))


def parse_edge_list(text: str) -> Graph:
    n = None
    edges = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "n":
            if n is not None or len(parts) != 2 or not parts[1].isdigit():
                raise MalformedLine(lineno, "expected a single 'n <count>' header")
            n = int(parts[1])
            continue
        if len(parts) != 2 or not all(p.lstrip("-").isdigit() for p in parts):
            raise MalformedLine(lineno, f"expected 'u v', got {line!r}")
        if n is None:
            raise MalformedLine(lineno, "edge before the 'n <count>' header")
        edges.append((int(parts[0]), int(parts[1])))
    if n is None:
        raise MalformedLine(0, "missing 'n <count>' header")
    return Graph.from_edges(n, edges)


def format_edge_list(g: Graph) -> str:
    return f"n {g.n}\n" + "".join(f"{u} {v}\n" for u, v in g.sorted_edges())
