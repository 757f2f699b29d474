"""Mixed causal graphs, unconditional connection structure, and sign matrices.

A mixed graph stores one edge per unordered vertex pair with one of four
types: ``--`` (tail-tail), ``->`` / ``<-`` (directed), ``<->``
(arrow-arrow). Graphs are validated to be ancestral on construction.

With an empty conditioning set, two vertices are m-connected exactly when
some path between them contains no collider. The bidirected graph over
the m-connection relation is the unique representative of a graph's
unconditional equivalence class, and the sign-matrix image of these
representatives carries the group and metric structure used throughout.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    InvalidGraphError,
    InvalidVertexError,
    NotSquareError,
)

EDGE_TYPES = ("--", "->", "<-", "<->")

_MIRROR = {"--": "--", "->": "<-", "<-": "->", "<->": "<->"}

# arrowhead present at (first endpoint, second endpoint) of the stored pair
_ARROW_AT = {
    "--": (False, False),
    "->": (False, True),
    "<-": (True, False),
    "<->": (True, True),
}


@dataclass(frozen=True, eq=False)
class MixedGraph:
    """Ancestral mixed graph over vertices 0..m-1."""

    m: int
    edges: dict

    def __post_init__(self):
        if self.m < 1:
            raise InvalidGraphError(f"need at least 1 vertex, got {self.m}")
        canonical = {}
        items = self.edges.items() if isinstance(self.edges, dict) else self.edges
        for (j, k), etype in items:
            if etype is None:
                continue
            if etype not in EDGE_TYPES:
                raise InvalidGraphError(f"unknown edge type {etype!r}")
            if j == k:
                raise InvalidGraphError(f"self-edge at vertex {j}")
            if not (0 <= j < self.m and 0 <= k < self.m):
                raise InvalidVertexError(f"edge ({j}, {k}) outside vertex range")
            if j > k:
                j, k, etype = k, j, _MIRROR[etype]
            if (j, k) in canonical and canonical[(j, k)] != etype:
                raise InvalidGraphError(f"conflicting edge types for pair ({j}, {k})")
            canonical[(j, k)] = etype
        object.__setattr__(self, "edges", canonical)
        _check_ancestral(self)

    def edge_type(self, j: int, k: int):
        """Edge type as seen from (j, k); None when the pair is non-adjacent."""
        if not (0 <= j < self.m and 0 <= k < self.m):
            raise InvalidVertexError(f"vertex pair ({j}, {k}) outside range")
        if j == k:
            return None
        if j < k:
            return self.edges.get((j, k))
        mirrored = self.edges.get((k, j))
        return None if mirrored is None else _MIRROR[mirrored]

    def neighbors(self, v: int):
        for (j, k), etype in self.edges.items():
            if j == v:
                yield k, _ARROW_AT[etype]
            elif k == v:
                yield j, (_ARROW_AT[etype][1], _ARROW_AT[etype][0])

    def parents(self, v: int):
        return [j for j in range(self.m) if self.edge_type(j, v) == "->"]

    def spouses(self, v: int):
        return [j for j in range(self.m) if self.edge_type(j, v) == "<->"]


def _ancestor_sets(graph: MixedGraph):
    """Strict-ancestor sets via directed edges only."""
    children = {v: [] for v in range(graph.m)}
    for (j, k), etype in graph.edges.items():
        if etype == "->":
            children[j].append(k)
        elif etype == "<-":
            children[k].append(j)
    ancestors = {v: set() for v in range(graph.m)}
    for root in range(graph.m):
        queue = deque(children[root])
        while queue:
            v = queue.popleft()
            if root not in ancestors[v]:
                ancestors[v].add(root)
                queue.extend(children[v])
    return ancestors


def _check_ancestral(graph: MixedGraph):
    ancestors = _ancestor_sets(graph)
    for v in range(graph.m):
        if v in ancestors[v]:
            raise InvalidGraphError(f"directed cycle through vertex {v}")
    for (j, k), etype in graph.edges.items():
        if etype == "<->":
            if j in ancestors[k] or k in ancestors[j]:
                raise InvalidGraphError(
                    f"almost-directed cycle: {j} <-> {k} with an ancestral path"
                )
        elif etype == "--":
            for v in (j, k):
                for _, (arrow_here, _) in graph.neighbors(v):
                    if arrow_here:
                        raise InvalidGraphError(
                            f"undirected edge endpoint {v} has an incident arrowhead"
                        )


def m_connected_empty(graph: MixedGraph, j: int, j_prime: int) -> bool:
    """True when some path from j to j_prime contains no collider.

    Search over states (vertex, entered-with-arrowhead): an interior vertex
    blocks exactly when both its incident path edges point into it.
    """
    if not (0 <= j < graph.m and 0 <= j_prime < graph.m):
        raise InvalidVertexError(f"vertex pair ({j}, {j_prime}) outside range")
    if j == j_prime:
        raise InvalidVertexError("endpoints must differ")
    seen = set()
    queue = deque()
    for w, (arrow_at_j, arrow_at_w) in graph.neighbors(j):
        if w == j_prime:
            return True
        state = (w, arrow_at_w)
        if state not in seen:
            seen.add(state)
            queue.append(state)
    while queue:
        v, entered_arrow = queue.popleft()
        for w, (arrow_at_v, arrow_at_w) in graph.neighbors(v):
            if entered_arrow and arrow_at_v:
                continue  # v would be a collider on this path
            if w == j_prime:
                return True
            state = (w, arrow_at_w)
            if state not in seen:
                seen.add(state)
                queue.append(state)
    return False


@dataclass(frozen=True, eq=False)
class BidirectedRepresentative:
    """Unconditional m-connection relation as a symmetric boolean matrix."""

    m: int
    connected: np.ndarray

    def __post_init__(self):
        conn = np.asarray(self.connected, dtype=bool)
        if conn.shape != (self.m, self.m):
            raise DimensionMismatchError(
                f"connection matrix shape {conn.shape} does not match m={self.m}"
            )
        if not np.array_equal(conn, conn.T):
            raise InvalidGraphError("connection matrix must be symmetric")
        if conn.diagonal().any():
            raise InvalidGraphError("connection matrix must have a false diagonal")
        object.__setattr__(self, "connected", conn)

    def to_graph(self) -> MixedGraph:
        edges = {
            (j, k): "<->"
            for j in range(self.m)
            for k in range(j + 1, self.m)
            if self.connected[j, k]
        }
        return MixedGraph(self.m, edges)


def representative(graph: MixedGraph) -> BidirectedRepresentative:
    """Bidirected representative of the graph's unconditional equivalence class."""
    conn = np.zeros((graph.m, graph.m), dtype=bool)
    for j in range(graph.m):
        for k in range(j + 1, graph.m):
            if m_connected_empty(graph, j, k):
                conn[j, k] = conn[k, j] = True
    return BidirectedRepresentative(m=graph.m, connected=conn)


def hamming_product(a, b):
    """Pairwise edge-type agreement (mutual absence included) as a bidirected graph.

    Accepts two MixedGraphs (returns a bidirected-only MixedGraph) or two
    representatives (returns a representative).
    """
    if isinstance(a, BidirectedRepresentative) and isinstance(b, BidirectedRepresentative):
        if a.m != b.m:
            raise DimensionMismatchError(f"vertex counts differ: {a.m} vs {b.m}")
        agree = a.connected == b.connected
        np.fill_diagonal(agree, False)
        return BidirectedRepresentative(m=a.m, connected=agree)
    if a.m != b.m:
        raise DimensionMismatchError(f"vertex counts differ: {a.m} vs {b.m}")
    edges = {}
    for j in range(a.m):
        for k in range(j + 1, a.m):
            if a.edge_type(j, k) == b.edge_type(j, k):
                edges[(j, k)] = "<->"
    return MixedGraph(a.m, edges)


def graph_distance(u: BidirectedRepresentative, u_prime: BidirectedRepresentative) -> int:
    """Number of ordered off-diagonal pairs where the representatives disagree."""
    if u.m != u_prime.m:
        raise DimensionMismatchError(f"vertex counts differ: {u.m} vs {u_prime.m}")
    return int(np.sum(u.connected != u_prime.connected))


@dataclass(frozen=True, eq=False)
class SignMatrix:
    """Symmetric +/-1 matrix with a +1 diagonal."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise NotSquareError(f"sign matrix must be square, got shape {values.shape}")
        values = values.astype(np.int8)
        if not np.isin(values, (-1, 1)).all():
            raise InvalidGraphError("sign matrix entries must be +1 or -1")
        if (values.diagonal() != 1).any():
            raise InvalidGraphError("sign matrix diagonal must be +1")
        if not np.array_equal(values, values.T):
            raise InvalidGraphError("sign matrix must be symmetric")
        object.__setattr__(self, "values", values)

    @property
    def m(self) -> int:
        return self.values.shape[0]

    def elementwise_product(self, other: "SignMatrix") -> "SignMatrix":
        if self.m != other.m:
            raise DimensionMismatchError(f"sizes differ: {self.m} vs {other.m}")
        return SignMatrix(self.values * other.values)

    def frobenius_inner(self, other: "SignMatrix") -> int:
        if self.m != other.m:
            raise DimensionMismatchError(f"sizes differ: {self.m} vs {other.m}")
        return int(np.sum(self.values.astype(np.int64) * other.values))


def sign_map(u: BidirectedRepresentative) -> SignMatrix:
    """+1 where connected or on the diagonal, -1 elsewhere."""
    values = np.where(u.connected, 1, -1).astype(np.int8)
    np.fill_diagonal(values, 1)
    return SignMatrix(values)


def sign_of_statistic(statistic: np.ndarray) -> SignMatrix:
    """Sign pattern of a square matrix: +1 for strictly positive or diagonal entries."""
    statistic = np.asarray(statistic, dtype=np.float64)
    if statistic.ndim != 2 or statistic.shape[0] != statistic.shape[1]:
        raise NotSquareError(f"expected a square matrix, got shape {statistic.shape}")
    values = np.where(statistic > 0.0, 1, -1).astype(np.int8)
    np.fill_diagonal(values, 1)
    return SignMatrix(values)


def graph_to_json(graph: MixedGraph) -> dict:
    edges = [[j, k, etype] for (j, k), etype in sorted(graph.edges.items())]
    return {"vertices": graph.m, "edges": edges}


def graph_from_json(payload) -> MixedGraph:
    if isinstance(payload, str):
        payload = json.loads(payload)
    m = int(payload["vertices"])
    edges = {}
    for entry in payload.get("edges", []):
        j, k, etype = entry
        edges[(int(j), int(k))] = str(etype)
    return MixedGraph(m, edges)
