"""Trader-pair aggregation and the weighted trader graph.

Trades inside one stock/window are first collapsed into per-pair statistics
(trade count, total volume, volume-weighted average price). The graph then
connects two kinds of pairs: traders who traded directly, and traders who
never traded but share a direct counterparty. Edge weights average up to
four closeness terms, each in [0, 1]:

    T  trade count, min-max rescaled over the window's direct pairs
    V  total volume, rescaled the same way
    P  volume-weighted average price, rescaled the same way
    C  commonality: Jaccard overlap of closed neighbor sets

Pairs connected only through a shared counterparty have no trades, so their
T/V/P terms are zero and their weight is carried entirely by commonality.
Any subset of the terms can be selected; the weight is the mean over the
selected terms, which keeps every weight in [0, 1].
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence, TextIO

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .errors import InputError
from .ingest import TradeRecord

TERMS = ("T", "V", "P", "C")

WEIGHT_DIGITS = 12  # significant digits in edge-list exports


@dataclass(frozen=True)
class PairStats:
    """Aggregated trading between one unordered trader pair (i < j)."""

    i: str
    j: str
    trade_count: int
    total_volume: int
    vwap: float

    def __post_init__(self):
        if self.i >= self.j:
            raise InputError(f"pair must be ordered i < j, got ({self.i!r}, {self.j!r})")
        if self.trade_count < 1 or self.total_volume < 1:
            raise InputError("pair statistics require at least one trade of volume >= 1")

    @property
    def key(self) -> tuple[str, str]:
        return (self.i, self.j)


@dataclass(frozen=True)
class FeatureBounds:
    """Per-feature min/max over the direct-trade pairs of one stock/window."""

    t_min: int
    t_max: int
    v_min: int
    v_max: int
    p_min: float
    p_max: float

    def __post_init__(self):
        if self.t_min > self.t_max or self.v_min > self.v_max or self.p_min > self.p_max:
            raise InputError("feature bounds require min <= max")


def pair_key(a: str, b: str) -> tuple[str, str]:
    """Canonical unordered-pair key: lexicographically sorted."""
    return (a, b) if a < b else (b, a)


def aggregate_pairs(trades: Iterable[TradeRecord]) -> dict[tuple[str, str], PairStats]:
    """Collapse trades into one PairStats per unordered trader pair.

    Count and volume accumulate; the price is the volume-weighted average
    over all of the pair's trades. Callers are expected to have filtered to
    a single stock and window already.
    """
    counts: dict[tuple[str, str], int] = {}
    volumes: dict[tuple[str, str], int] = {}
    notional: dict[tuple[str, str], float] = {}
    for t in trades:
        key = pair_key(t.buyer_id, t.seller_id)
        counts[key] = counts.get(key, 0) + 1
        volumes[key] = volumes.get(key, 0) + t.volume
        notional[key] = notional.get(key, 0.0) + t.price * t.volume
    return {
        key: PairStats(key[0], key[1], counts[key], volumes[key], notional[key] / volumes[key])
        for key in counts
    }


def direct_neighbor_sets(pairs: Mapping[tuple[str, str], PairStats]) -> dict[str, frozenset[str]]:
    """Closed neighborhoods from direct trades: each trader's partners plus itself."""
    partners: dict[str, set[str]] = {}
    for i, j in pairs:
        partners.setdefault(i, {i}).add(j)
        partners.setdefault(j, {j}).add(i)
    return {v: frozenset(s) for v, s in partners.items()}


def jaccard_commonality(neighbors_i: frozenset[str] | set[str], neighbors_j: frozenset[str] | set[str]) -> float:
    """|intersection| / |union| of two closed neighbor sets."""
    if not neighbors_i or not neighbors_j:
        raise InputError("neighbor sets must be non-empty (each contains its own vertex)")
    return len(neighbors_i & neighbors_j) / len(neighbors_i | neighbors_j)


def feature_bounds(pairs: Mapping[tuple[str, str], PairStats]) -> FeatureBounds:
    """Min/max of trade count, volume and VWAP over the direct-trade pairs."""
    if not pairs:
        raise InputError("cannot compute feature bounds from an empty pair set")
    stats = list(pairs.values())
    return FeatureBounds(
        t_min=min(s.trade_count for s in stats),
        t_max=max(s.trade_count for s in stats),
        v_min=min(s.total_volume for s in stats),
        v_max=max(s.total_volume for s in stats),
        p_min=min(s.vwap for s in stats),
        p_max=max(s.vwap for s in stats),
    )


def normalize_feature(x: float, lo: float, hi: float) -> float:
    """Affine rescale of x from [lo, hi] onto [0, 1], clamped.

    Degenerate bounds (hi == lo) rescale to 1.0: when every observed pair is
    equally extreme, the feature carries no contrast and real activity should
    not be erased to zero.
    """
    if lo > hi:
        raise InputError(f"invalid bounds: lo {lo} > hi {hi}")
    if hi == lo:
        return 1.0
    return min(1.0, max(0.0, (x - lo) / (hi - lo)))


def normalize_terms(terms: str | Iterable[str]) -> tuple[str, ...]:
    """Canonicalize a term selection like 'tvpc' or ('T','C') to a subset of TERMS."""
    if isinstance(terms, str):
        terms = list(terms)
    chosen = {t.upper() for t in terms}
    unknown = chosen - set(TERMS)
    if unknown:
        raise InputError(f"unknown weight terms: {sorted(unknown)} (valid: {''.join(TERMS)})")
    if not chosen:
        raise InputError("at least one weight term is required")
    return tuple(t for t in TERMS if t in chosen)


class WeightedGraph:
    """Symmetric, positively weighted simple graph over string vertex ids.

    Vertices keep their given order; absent weights mean zero. Weights of
    exactly zero are dropped at construction, negative or self-loop weights
    are rejected, and a pair supplied in both orientations must agree.
    """

    def __init__(self, vertices: Iterable[str], weights: Mapping[tuple[str, str], float]):
        self.vertices: tuple[str, ...] = tuple(vertices)
        if len(set(self.vertices)) != len(self.vertices):
            raise InputError("duplicate vertex identifiers")
        self._index = {v: i for i, v in enumerate(self.vertices)}
        self._w: dict[tuple[int, int], float] = {}
        for (a, b), w in weights.items():
            if a not in self._index or b not in self._index:
                raise InputError(f"edge endpoint not in vertex list: ({a!r}, {b!r})")
            if a == b:
                raise InputError(f"self-loop on {a!r} is not allowed")
            w = float(w)
            if w != w or w < 0:
                raise InputError(f"edge ({a!r}, {b!r}) has invalid weight {w}")
            if w == 0.0:
                continue
            ia, ib = self._index[a], self._index[b]
            key = (ia, ib) if ia < ib else (ib, ia)
            if key in self._w and self._w[key] != w:
                raise InputError(f"asymmetric weights for pair ({a!r}, {b!r})")
            self._w[key] = w

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def edge_count(self) -> int:
        return len(self._w)

    def index_of(self, vertex: str) -> int:
        return self._index[vertex]

    def weight(self, a: str, b: str) -> float:
        ia, ib = self._index[a], self._index[b]
        if ia == ib:
            return 0.0
        return self._w.get((ia, ib) if ia < ib else (ib, ia), 0.0)

    def edges(self) -> Iterator[tuple[str, str, float]]:
        """Edges as (id_a, id_b, weight) with id_a < id_b lexicographically."""
        for (ia, ib), w in self._w.items():
            a, b = self.vertices[ia], self.vertices[ib]
            yield (a, b, w) if a < b else (b, a, w)

    def weights_by_id(self) -> dict[tuple[str, str], float]:
        return {(a, b): w for a, b, w in self.edges()}

    def total_weight(self) -> float:
        return float(sum(self._w.values()))

    def degrees(self) -> np.ndarray:
        d = np.zeros(self.n)
        for (ia, ib), w in self._w.items():
            d[ia] += w
            d[ib] += w
        return d

    def to_dense(self) -> np.ndarray:
        W = np.zeros((self.n, self.n))
        for (ia, ib), w in self._w.items():
            W[ia, ib] = w
            W[ib, ia] = w
        return W

    def to_sparse(self) -> sparse.csr_array:
        rows, cols, data = [], [], []
        for (ia, ib), w in self._w.items():
            rows += (ia, ib)
            cols += (ib, ia)
            data += (w, w)
        return sparse.csr_array(
            sparse.coo_array((data, (rows, cols)), shape=(self.n, self.n))
        )

    def isolated_vertices(self) -> list[str]:
        touched = set()
        for ia, ib in self._w:
            touched.add(ia)
            touched.add(ib)
        return [v for i, v in enumerate(self.vertices) if i not in touched]

    def connected_components(self) -> list[list[str]]:
        """Vertex groups per component, each sorted, largest-first then by id."""
        if self.n == 0:
            return []
        n_comp, labels = csgraph.connected_components(self.to_sparse(), directed=False)
        groups: list[list[str]] = [[] for _ in range(n_comp)]
        for v, lab in zip(self.vertices, labels):
            groups[lab].append(v)
        for g in groups:
            g.sort()
        groups.sort(key=lambda g: (-len(g), g[0]))
        return groups

    def is_connected(self) -> bool:
        return self.n <= 1 or len(self.connected_components()) == 1

    def subgraph(self, keep: Iterable[str]) -> "WeightedGraph":
        """Induced subgraph on ``keep``, preserving relative vertex order."""
        keep_set = set(keep)
        missing = keep_set - set(self.vertices)
        if missing:
            raise InputError(f"unknown vertices: {sorted(missing)}")
        verts = [v for v in self.vertices if v in keep_set]
        weights = {
            (a, b): w for a, b, w in self.edges() if a in keep_set and b in keep_set
        }
        return WeightedGraph(verts, weights)


def build_graph(
    pairs: Mapping[tuple[str, str], PairStats],
    bounds: FeatureBounds | None = None,
    terms: str | Iterable[str] = TERMS,
) -> WeightedGraph:
    """Build the weighted trader graph from per-pair statistics.

    Vertices are all traders appearing in ``pairs``. Edges are the direct
    pairs plus every pair sharing at least one direct counterparty. Each
    edge's weight is the mean of the selected terms; zero-weight edges are
    dropped. With all four terms and a pair maximal in count, volume and
    price whose traders share all neighbors, the weight is exactly 1.
    """
    if not pairs:
        raise InputError("cannot build a graph from an empty pair set")
    selected = normalize_terms(terms)
    if bounds is None:
        bounds = feature_bounds(pairs)

    vertices = sorted({v for key in pairs for v in key})
    neighbors = direct_neighbor_sets(pairs)

    candidates = set(pairs)
    partners: dict[str, list[str]] = {}
    for i, j in pairs:
        partners.setdefault(i, []).append(j)
        partners.setdefault(j, []).append(i)
    for shared in vertices:
        for a, b in itertools.combinations(sorted(partners[shared]), 2):
            candidates.add((a, b))

    weights: dict[tuple[str, str], float] = {}
    for key in candidates:
        stats = pairs.get(key)
        total = 0.0
        for term in selected:
            if term == "C":
                total += jaccard_commonality(neighbors[key[0]], neighbors[key[1]])
            elif stats is not None:
                if term == "T":
                    total += normalize_feature(stats.trade_count, bounds.t_min, bounds.t_max)
                elif term == "V":
                    total += normalize_feature(stats.total_volume, bounds.v_min, bounds.v_max)
                else:
                    total += normalize_feature(stats.vwap, bounds.p_min, bounds.p_max)
        w = total / len(selected)
        if w > 0.0:
            weights[key] = w
    return WeightedGraph(vertices, weights)


def write_graph_csv(graph: WeightedGraph, edges: TextIO, vertices: TextIO | None = None) -> None:
    """Write the edge list (i,j,weight with i < j) and optionally the vertex list.

    The vertex list preserves isolated vertices across a round trip; weights
    are printed with 12 significant digits.
    """
    writer = csv.writer(edges, lineterminator="\n")
    writer.writerow(["i", "j", "weight"])
    for a, b, w in sorted(graph.edges()):
        writer.writerow([a, b, format(w, f".{WEIGHT_DIGITS}g")])
    if vertices is not None:
        vwriter = csv.writer(vertices, lineterminator="\n")
        vwriter.writerow(["trader_id"])
        for v in graph.vertices:
            vwriter.writerow([v])


def read_graph_csv(edges: TextIO, vertices: TextIO | None = None) -> WeightedGraph:
    """Read a graph written by :func:`write_graph_csv`.

    Without a vertex file the vertex set is the sorted edge endpoints, so
    isolated vertices are only recoverable when the vertex file is given.
    """
    reader = csv.reader(edges)
    header = next(reader, None)
    if header is None or [h.strip().lower() for h in header[:3]] != ["i", "j", "weight"]:
        raise InputError("edge list must start with header 'i,j,weight'")
    weights: dict[tuple[str, str], float] = {}
    for line_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) < 3:
            raise InputError(f"edge list line {line_no}: expected 'i,j,weight'")
        try:
            w = float(row[2])
        except ValueError:
            raise InputError(f"edge list line {line_no}: bad weight {row[2]!r}") from None
        weights[(row[0], row[1])] = w

    if vertices is not None:
        vreader = csv.reader(vertices)
        vheader = next(vreader, None)
        if vheader is None or vheader[0].strip().lower() != "trader_id":
            raise InputError("vertex list must start with header 'trader_id'")
        verts: Sequence[str] = [row[0] for row in vreader if row]
    else:
        verts = sorted({v for key in weights for v in key})
    return WeightedGraph(verts, weights)
