"""The bounded coarse structure of a metric space, at window scale.

Entourages are distance thresholds ``E_K = {(x, y) : d(x, y) <= K}``.  The
threshold algebra (:func:`compose`, :func:`inverse`) works on the
thresholds alone; explicit pair sets only exist inside a finite
:class:`Window`, where they can be enumerated and checked.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from .errors import InputError

INF = math.inf


@dataclass(frozen=True)
class Entourage:
    threshold: float

    def __post_init__(self):
        t = self.threshold
        if not isinstance(t, (int, float, np.integer, np.floating)) or math.isnan(t) or t < 0:
            raise InputError(f"entourage threshold must be a non-negative number, got {t!r}")

    def contains(self, w: "Window", x, y) -> bool:
        return w.dist(x, y) <= self.threshold

    def pairs(self, w: "Window") -> set:
        """The pair set ``E`` restricted to the window."""
        D = w.distance_matrix
        i, j = np.nonzero(D <= self.threshold)
        pts = w.points
        return {(pts[a], pts[b]) for a, b in zip(i.tolist(), j.tolist())}


def compose(E: Entourage, F: Entourage) -> Entourage:
    """Threshold of ``E o F``; contains every two-hop ``E``-then-``F`` pair."""
    return Entourage(E.threshold + F.threshold)


def inverse(E: Entourage) -> Entourage:
    # metric entourages are symmetric
    return Entourage(E.threshold)


@dataclass(frozen=True)
class BoundedRegion:
    """The closed ball ``B(center; radius)``."""

    center: Any
    radius: float

    def __post_init__(self):
        if self.radius is None or self.radius < 0:
            raise InputError(f"region radius must be non-negative, got {self.radius!r}")

    def contains(self, w: "Window", x) -> bool:
        return w.dist(self.center, x) <= self.radius


@dataclass(frozen=True, eq=False)
class Window:
    """A finite excerpt of a space: points, graph edges, and induced distances.

    ``radius[i]`` is the distance from ``origin`` to ``points[i]``.  A
    window built by :func:`endslab.spaces.ball` contains every point of the
    space within ``horizon`` of the origin.
    """

    origin: Any
    horizon: float
    points: tuple
    adjacency: sp.csr_matrix = field(repr=False)
    radius: np.ndarray = field(repr=False)
    space: Any = field(default=None, repr=False)
    _cache: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_graph(cls, origin, horizon, points: Sequence, rows, cols, weights=None,
                   radius=None, space=None) -> "Window":
        n = len(points)
        data = np.ones(len(rows)) if weights is None else np.asarray(weights, dtype=float)
        adj = sp.csr_matrix((data, (np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64))),
                            shape=(n, n))
        adj = adj.maximum(adj.T).tocsr()
        points = tuple(points)
        if radius is None:
            try:
                o = points.index(origin)
            except ValueError:
                raise InputError("window origin is not among its points") from None
            radius = csgraph.dijkstra(adj, directed=False, indices=o)
        return cls(origin, horizon, points, adj, np.asarray(radius, dtype=float), space)

    def __len__(self):
        return len(self.points)

    def __contains__(self, p):
        return p in self.index

    @cached_property
    def index(self) -> dict:
        return {p: i for i, p in enumerate(self.points)}

    @cached_property
    def names(self) -> tuple:
        """Canonical strings of the points."""
        if self.space is None:
            return tuple(str(p) for p in self.points)
        fmt = self.space.format_point
        return tuple(fmt(p) for p in self.points)

    @cached_property
    def name_rank(self) -> np.ndarray:
        """Position of each point in lexicographic order of canonical strings."""
        order = np.argsort(np.array(self.names, dtype=object), kind="stable")
        rank = np.empty(len(order), dtype=np.int64)
        rank[order] = np.arange(len(order))
        return rank

    @cached_property
    def unit_weights(self) -> bool:
        return bool(np.all(self.adjacency.data == 1))

    def locate(self, p) -> int:
        try:
            return self.index[p]
        except KeyError:
            raise InputError(f"point {p!r} is not in the window") from None

    def dist(self, x, y) -> float:
        i, j = self.locate(x), self.locate(y)
        if "D" in self._cache:
            return float(self._cache["D"][i, j])
        row = csgraph.dijkstra(self.adjacency, directed=False, indices=i)
        return float(row[j])

    @property
    def distance_matrix(self) -> np.ndarray:
        """All-pairs shortest paths inside the window (``inf`` if disconnected)."""
        if "D" not in self._cache:
            if len(self) > 20_000:
                raise InputError("distance matrix requested for a window above 20000 points")
            self._cache["D"] = csgraph.shortest_path(self.adjacency, directed=False,
                                                     unweighted=self.unit_weights)
        return self._cache["D"]

    def khop(self, K: float) -> sp.csr_matrix:
        """Boolean matrix of the relation ``d(x, y) <= K`` within the window."""
        key = ("khop", K)
        if key in self._cache:
            return self._cache[key]
        n = len(self)
        eye = sp.identity(n, dtype=bool, format="csr")
        if K == INF:
            D = self.distance_matrix
            R = sp.csr_matrix(np.isfinite(D))
        elif self.unit_weights:
            steps = int(math.floor(K))
            step = (self.adjacency != 0).astype(bool).tocsr() + eye
            R = eye
            for _ in range(steps):
                R = (R @ step).astype(bool).tocsr()
        else:
            D = csgraph.dijkstra(self.adjacency, directed=False, limit=K)
            R = sp.csr_matrix(D <= K)
        self._cache[key] = R
        return R

    # -- serialisation ------------------------------------------------
    def to_json(self) -> dict:
        names = self.names
        coo = sp.triu(self.adjacency, k=1).tocoo()
        edges = sorted(
            [names[a], names[b], _num(w)] if names[a] <= names[b] else [names[b], names[a], _num(w)]
            for a, b, w in zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist()))
        origin = names[self.locate(self.origin)]
        return {"origin": origin, "horizon": _num(self.horizon), "points": sorted(names), "edges": edges}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, doc: dict | str, space=None) -> "Window":
        """Rebuild a window; distances come back from shortest paths over the edges."""
        if isinstance(doc, str):
            doc = json.loads(doc)
        try:
            names = list(doc["points"])
            edges = doc["edges"]
            origin = doc["origin"]
            horizon = doc["horizon"]
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed window document: {exc}") from None
        parse = space.parse_point if space is not None else (lambda s: s)
        points = [parse(s) for s in names]
        index = {s: i for i, s in enumerate(names)}
        rows, cols, ws = [], [], []
        for e in edges:
            a, b = e[0], e[1]
            w = e[2] if len(e) > 2 else 1
            if a not in index or b not in index:
                raise InputError(f"edge {e!r} references a point outside the window")
            rows.append(index[a])
            cols.append(index[b])
            ws.append(w)
        return cls.from_graph(parse(origin), horizon, points, rows, cols, ws, space=space)


def _num(x):
    x = float(x)
    return int(x) if x.is_integer() else x


# ---------------------------------------------------------------------------
# window-scale checks


def controlled_sup(w: Window, pairs: Iterable) -> float:
    best = 0.0
    for x, y in pairs:
        best = max(best, w.dist(x, y))
    return best


def is_controlled(w: Window, pairs: Iterable) -> tuple[bool, float]:
    """Whether a pair set is controlled, together with its distance sup.

    Raises :class:`InputError` if a pair leaves the window.
    """
    pairs = list(pairs)
    for x, y in pairs:
        if x not in w or y not in w:
            raise InputError(f"pair ({x!r}, {y!r}) references a point outside the window")
    sup = controlled_sup(w, pairs)
    return sup < INF, _num(sup) if sup < INF else sup


def is_bounded(w: Window, pts: Iterable) -> bool:
    pts = list(pts)
    return is_controlled(w, ((x, y) for x in pts for y in pts))[0]


def set_compose(P: Iterable, Q: Iterable) -> set:
    """Exact relational composition ``{(x, y) : (x, z) in P, (z, y) in Q}``."""
    by_first: dict = {}
    for z, y in Q:
        by_first.setdefault(z, []).append(y)
    return {(x, y) for x, z in P for y in by_first.get(z, ())}


def set_inverse(P: Iterable) -> set:
    return {(y, x) for x, y in P}


def diagonal(w: Window) -> set:
    return {(p, p) for p in w.points}
