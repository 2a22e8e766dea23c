"""Torus and grid lattice graphs, and block partitions of a torus into sub-grids.

All graphs here are directed 4-regular multigraphs on an n x n vertex set,
indexed row-major: vertex v = r * n + c.  The torus wraps coordinates
modulo n (for n = 2 this produces parallel edges); the grid clamps
coordinates at the boundary, turning each out-of-range move into a
self-loop so that every vertex keeps out-degree and in-degree 4.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Graph",
    "PartitionLayout",
    "build_torus",
    "build_grid",
    "build_rect_grid",
    "partition_torus",
    "subgrid_graph",
]


@dataclass(frozen=True)
class Graph:
    """Directed multigraph with lattice coordinates attached to each vertex.

    Parameters
    ----------
    n_vertices : int
        Number of vertices, labeled 0 .. n_vertices - 1.
    edges : tuple of (int, int)
        Directed (source, target) pairs; parallel edges appear as
        repeated entries, self-loops as (v, v).
    coords : tuple of (int, int)
        (row, col) lattice coordinate of each vertex, in label order.
    kind : str
        "torus" or "grid".
    shape : tuple of (int, int)
        (height, width) of the underlying lattice.
    """

    n_vertices: int
    edges: tuple[tuple[int, int], ...]
    coords: tuple[tuple[int, int], ...]
    kind: str
    shape: tuple[int, int]

    def __post_init__(self) -> None:
        if self.n_vertices <= 0:
            raise ValueError("graph needs at least one vertex")
        if len(self.coords) != self.n_vertices:
            raise ValueError("one coordinate pair per vertex required")
        for u, v in self.edges:
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
                raise ValueError(f"edge ({u}, {v}) out of range")

    def out_degrees(self) -> np.ndarray:
        deg = np.zeros(self.n_vertices, dtype=np.int64)
        for u, _ in self.edges:
            deg[u] += 1
        return deg

    def in_degrees(self) -> np.ndarray:
        deg = np.zeros(self.n_vertices, dtype=np.int64)
        for _, v in self.edges:
            deg[v] += 1
        return deg

    def self_loop_count(self) -> int:
        return sum(1 for u, v in self.edges if u == v)

    def to_dict(self) -> dict:
        """JSON-ready description of the graph."""
        return {
            "kind": self.kind,
            "shape": list(self.shape),
            "n_vertices": self.n_vertices,
            "coords": [list(rc) for rc in self.coords],
            "edges": [list(e) for e in self.edges],
        }

    @staticmethod
    def from_dict(doc: dict) -> "Graph":
        return Graph(
            n_vertices=int(doc["n_vertices"]),
            edges=tuple((int(u), int(v)) for u, v in doc["edges"]),
            coords=tuple((int(r), int(c)) for r, c in doc["coords"]),
            kind=str(doc["kind"]),
            shape=(int(doc["shape"][0]), int(doc["shape"][1])),
        )


# Moves in fixed order: up, down, left, right (row-1, row+1, col-1, col+1).
_MOVES = ((-1, 0), (1, 0), (0, -1), (0, 1))


def build_torus(n: int) -> Graph:
    """n x n torus: each vertex points at its four cyclic lattice neighbors.

    For n = 2, opposite moves coincide and the edge list carries parallel
    edges, so the walk matrix later gets entries 1/2 instead of 1/4.
    """
    if n < 2:
        raise ValueError("torus needs n >= 2")
    edges = []
    coords = []
    for r in range(n):
        for c in range(n):
            u = r * n + c
            coords.append((r, c))
            for dr, dc in _MOVES:
                v = ((r + dr) % n) * n + ((c + dc) % n)
                edges.append((u, v))
    return Graph(n * n, tuple(edges), tuple(coords), "torus", (n, n))


def _rect_grid_edges(height: int, width: int) -> list[tuple[int, int]]:
    # Clamped moves: every step that would leave the rectangle becomes a
    # self-loop, preserving 4-out/4-in at the boundary.
    edges = []
    for r in range(height):
        for c in range(width):
            u = r * width + c
            for dr, dc in _MOVES:
                rr = min(max(r + dr, 0), height - 1)
                cc = min(max(c + dc, 0), width - 1)
                edges.append((u, rr * width + cc))
    return edges


def build_rect_grid(height: int, width: int) -> Graph:
    """height x width grid with boundary self-loops (blocks need not be square)."""
    if height < 1 or width < 1:
        raise ValueError("grid needs positive side lengths")
    coords = tuple((r, c) for r in range(height) for c in range(width))
    return Graph(
        height * width,
        tuple(_rect_grid_edges(height, width)),
        coords,
        "grid",
        (height, width),
    )


def build_grid(n: int) -> Graph:
    """n x n grid with boundary self-loops; corners get two loops each."""
    if n < 2:
        raise ValueError("grid needs n >= 2")
    return build_rect_grid(n, n)


def _axis_blocks(n: int, q: int) -> tuple[tuple[int, int], ...]:
    # q intervals covering range(n); the first n % q of them take the
    # larger length ceil(n/q), the rest floor(n/q).
    base, extra = divmod(n, q)
    blocks = []
    start = 0
    for i in range(q):
        size = base + (1 if i < extra else 0)
        blocks.append((start, start + size))
        start += size
    return tuple(blocks)


@dataclass(frozen=True)
class PartitionLayout:
    """Axis-aligned tiling of the n x n torus by q^2 rectangular blocks.

    Built for a requested minimum block side d: q = max(1, floor(n/d))
    blocks per axis, with side lengths floor(n/q) or ceil(n/q).  When
    d <= n/2 the smaller side D = floor(n/q) satisfies d <= D < 2d.
    Block b = br * q + bc spans row_ranges[br] x col_ranges[bc].
    """

    n: int
    d: int
    q: int
    row_ranges: tuple[tuple[int, int], ...]
    col_ranges: tuple[tuple[int, int], ...]

    @property
    def n_blocks(self) -> int:
        return self.q * self.q

    @property
    def base_side(self) -> int:
        """D, the smaller of the two block side lengths in use."""
        return self.n // self.q

    def block_range(self, block: int) -> tuple[tuple[int, int], tuple[int, int]]:
        if not (0 <= block < self.n_blocks):
            raise ValueError(f"block index {block} out of range")
        return self.row_ranges[block // self.q], self.col_ranges[block % self.q]

    def block_shape(self, block: int) -> tuple[int, int]:
        (r0, r1), (c0, c1) = self.block_range(block)
        return (r1 - r0, c1 - c0)

    def block_of(self) -> np.ndarray:
        """Block index of every torus vertex, as a flat length-n^2 array."""
        row_idx = np.zeros(self.n, dtype=np.int64)
        for i, (a, b) in enumerate(self.row_ranges):
            row_idx[a:b] = i
        col_idx = np.zeros(self.n, dtype=np.int64)
        for i, (a, b) in enumerate(self.col_ranges):
            col_idx[a:b] = i
        return (row_idx[:, None] * self.q + col_idx[None, :]).reshape(-1)

    def block_vertices(self, block: int) -> np.ndarray:
        """Torus vertex labels inside a block, in local row-major order."""
        (r0, r1), (c0, c1) = self.block_range(block)
        rows = np.arange(r0, r1)
        cols = np.arange(c0, c1)
        return (rows[:, None] * self.n + cols[None, :]).reshape(-1)

    def weights(self) -> np.ndarray:
        """Fraction of torus vertices per block (the mixture weights)."""
        sizes = np.array(
            [self.block_shape(b)[0] * self.block_shape(b)[1] for b in range(self.n_blocks)],
            dtype=np.float64,
        )
        return sizes / float(self.n * self.n)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "q": self.q,
            "base_side": self.base_side,
            "row_ranges": [list(r) for r in self.row_ranges],
            "col_ranges": [list(c) for c in self.col_ranges],
        }


def partition_torus(n: int, d: int) -> PartitionLayout:
    """Tile the n x n torus with q^2 near-square blocks of side about d.

    q = max(1, floor(n/d)); each axis is split into q contiguous runs of
    length floor(n/q) or ceil(n/q), the longer runs first.  d > n/2 (or
    d >= n) collapses the tiling to a single block covering everything.
    """
    if n < 2:
        raise ValueError("torus needs n >= 2")
    if d < 1:
        raise ValueError("block side d must be >= 1")
    q = max(1, n // d)
    axis = _axis_blocks(n, q)
    return PartitionLayout(n=n, d=d, q=q, row_ranges=axis, col_ranges=axis)


def subgrid_graph(layout: PartitionLayout, block: int) -> Graph:
    """Grid graph on one block: edges leaving the block become self-loops.

    The result is relabeled to local row-major indices and is identical
    (up to relabeling) to build_rect_grid on the block's shape.  Degree
    is conserved: one self-loop appears per removed cut edge, which for
    a single-block layout means the torus wraparound edges themselves.
    """
    height, width = layout.block_shape(block)
    return build_rect_grid(height, width)
