"""Effective-tensor-network geometry: build the active-bond graph from a
spacetime record, compute top-bottom minimal cuts (max-flow) and red bonds.

Bond rows: row 0 is the initial (all-active) row, row r >= 1 the flag row
after layer r. Layer r sits between rows r-1 and r and consists of the
parity-(r-1 mod 2) gate pairs plus pass-through nodes for uncovered sites.
Every source-sink path crosses each bond row exactly once, which is what
makes the fast red-bond rule below exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_flow

from .circuit import SpacetimeRecord


def _layer_groups(L: int, parity: int, periodic: bool) -> list[tuple[int, ...]]:
    """Site groups (pairs and pass-through singles) of one gate layer."""
    groups: list[tuple[int, ...]] = []
    covered = np.zeros(L, dtype=bool)
    if parity == 0:
        for j in range(0, L - 1, 2):
            groups.append((j, j + 1))
            covered[j] = covered[j + 1] = True
    else:
        stop = L if periodic else L - 1
        for j in range(1, stop, 2):
            k = (j + 1) % L
            groups.append((j, k))
            covered[j] = covered[k] = True
    for j in range(L):
        if not covered[j]:
            groups.append((j,))
    return groups


@dataclass
class EtnGraph:
    """Directed spacetime graph of active bonds with unit capacities."""
    n_nodes: int
    source: int
    sink: int
    tail: np.ndarray       # per active bond
    head: np.ndarray
    bond_row: np.ndarray
    bond_site: np.ndarray
    L: int
    T: int
    boundary: str

    @property
    def n_edges(self) -> int:
        return self.tail.shape[0]


@dataclass
class CutResult:
    value: int
    witness: list[tuple[int, int]]  # (bond row, site) achieving the cut


def build_etn(record: SpacetimeRecord, boundary: str | None = None) -> EtnGraph:
    """Graph of the record's active bonds; inactive bonds and nodes touching
    only inactive bonds are absent."""
    boundary = boundary or record.boundary
    periodic = boundary == "periodic"
    rows = record.bond_rows().astype(bool)
    T, L = record.T, record.L

    group_of = np.empty((T, L), dtype=np.int64)
    offsets = np.empty(T + 1, dtype=np.int64)
    offsets[0] = 0
    for t in range(1, T + 1):
        groups = _layer_groups(L, (t - 1) % 2, periodic)
        for gi, grp in enumerate(groups):
            for s in grp:
                group_of[t - 1, s] = gi
        offsets[t] = offsets[t - 1] + len(groups)

    def node_id(layer: int, site: int) -> int:
        return 2 + int(offsets[layer - 1]) + int(group_of[layer - 1, site])

    tails, heads, brow, bsite = [], [], [], []
    for r in range(T + 1):
        for j in np.nonzero(rows[r])[0]:
            tails.append(0 if r == 0 else node_id(r, j))
            heads.append(1 if r == T else node_id(r + 1, j))
            brow.append(r)
            bsite.append(j)
    tail = np.array(tails, dtype=np.int64)
    head = np.array(heads, dtype=np.int64)

    # compact node ids: keep only source, sink, and touched nodes
    used = np.unique(np.concatenate([tail, head, [0, 1]]))
    remap = {int(u): i for i, u in enumerate(used)}
    tail = np.array([remap[int(x)] for x in tail], dtype=np.int64)
    head = np.array([remap[int(x)] for x in head], dtype=np.int64)
    return EtnGraph(
        n_nodes=len(used), source=remap[0], sink=remap[1],
        tail=tail, head=head,
        bond_row=np.array(brow, dtype=np.int64),
        bond_site=np.array(bsite, dtype=np.int64),
        L=L, T=T, boundary=boundary)


def min_cut(graph: EtnGraph) -> CutResult:
    """Max-flow value (= minimal number of active bonds separating bottom
    from top) plus one witness cut, found on the residual graph."""
    if graph.n_edges == 0:
        return CutResult(0, [])
    n = graph.n_nodes
    cap = csr_matrix((np.ones(graph.n_edges, dtype=np.int32),
                      (graph.tail, graph.head)), shape=(n, n))
    cap.sum_duplicates()
    res = maximum_flow(cap, graph.source, graph.sink)
    flow = res.flow
    # residual reachability from the source
    residual = ((cap - flow) > 0) + (flow.T > 0)
    reach = np.zeros(n, dtype=bool)
    stack = [graph.source]
    reach[graph.source] = True
    indptr, indices = residual.indptr, residual.indices
    data = residual.data
    while stack:
        u = stack.pop()
        for idx in range(indptr[u], indptr[u + 1]):
            if data[idx] and not reach[indices[idx]]:
                reach[indices[idx]] = True
                stack.append(indices[idx])
    crossing = reach[graph.tail] & ~reach[graph.head]
    witness = [(int(r), int(s)) for r, s in
               zip(graph.bond_row[crossing], graph.bond_site[crossing])]
    if len(witness) != res.flow_value:
        raise AssertionError("max-flow/min-cut duality violated")
    return CutResult(int(res.flow_value), witness)


def _feed_next(prev: np.ndarray, parity: int, periodic: bool) -> np.ndarray:
    """Which sites of the next bond row are fed through the layer's nodes."""
    L = prev.shape[0]
    fed = np.zeros(L, dtype=bool)
    if parity == 0:
        jj = np.arange(0, L - 1, 2)
    else:
        jj = np.arange(1, L if periodic else L - 1, 2)
    kk = (jj + 1) % L
    has = prev[jj] | prev[kk]
    fed[jj] = has
    fed[kk] = has
    covered = np.zeros(L, dtype=bool)
    covered[jj] = True
    covered[kk] = True
    fed[~covered] = prev[~covered]
    return fed


def usable_bonds(record: SpacetimeRecord, boundary: str | None = None) -> np.ndarray:
    """(T+1, L) mask of bonds that lie on at least one source-sink path."""
    boundary = boundary or record.boundary
    periodic = boundary == "periodic"
    rows = record.bond_rows().astype(bool)
    T, L = record.T, record.L
    reach = np.zeros_like(rows)
    reach[0] = rows[0]
    for r in range(1, T + 1):
        reach[r] = rows[r] & _feed_next(reach[r - 1], (r - 1) % 2, periodic)
    coreach = np.zeros_like(rows)
    coreach[T] = rows[T]
    for r in range(T - 1, -1, -1):
        coreach[r] = rows[r] & _feed_next(coreach[r + 1], r % 2, periodic)
    return reach & coreach


def red_bonds(record: SpacetimeRecord, boundary: str | None = None
              ) -> tuple[int, list[tuple[int, int]]]:
    """Active bonds whose sole removal disconnects top from bottom.

    Every source-sink path crosses each bond row once, so a bond is red
    exactly when it is the unique usable (reachable and co-reachable) bond
    of its row. Returns (count, [(row, site), ...]); 0 when no path exists.
    """
    usable = usable_bonds(record, boundary)
    if not usable[-1].any():
        return 0, []
    counts = usable.sum(axis=1)
    out = []
    for r in np.nonzero(counts == 1)[0]:
        out.append((int(r), int(np.nonzero(usable[r])[0][0])))
    return len(out), out


def red_bonds_definitional(record: SpacetimeRecord, boundary: str | None = None
                           ) -> tuple[int, list[tuple[int, int]]]:
    """Definitional check: remove each candidate bond and retest
    connectivity. Slow; the oracle for red_bonds."""
    boundary = boundary or record.boundary
    rows = record.bond_rows().astype(np.uint8)
    base = usable_bonds(record, boundary)
    if not base[-1].any():
        return 0, []
    out = []
    T, L = record.T, record.L
    for r in range(T + 1):
        for j in range(L):
            if not base[r, j]:
                continue
            rows[r, j] = 0
            still = _connected_with_top_row(rows, boundary)
            rows[r, j] = 1
            if not still:
                out.append((r, j))
    return len(out), out


def _connected_with_top_row(rows: np.ndarray, boundary: str) -> bool:
    periodic = boundary == "periodic"
    T = rows.shape[0] - 1
    reach = rows[0].astype(bool)
    for r in range(1, T + 1):
        reach = rows[r].astype(bool) & _feed_next(reach, (r - 1) % 2, periodic)
    return bool(reach.any())
