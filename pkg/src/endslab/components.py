"""K-connected components outside balls, end profiles and component threads.

Two routes reach the same objects:

* window route: materialise ``ball(xi, horizon)``, build the ``d <= K``
  relation as a sparse matrix and hand it to
  :func:`scipy.sparse.csgraph.connected_components`;
* lazy route (:func:`find_chain`, :func:`component_of`): breadth-first
  search in the K-hop graph, generating neighbours on demand.  Used where
  the full ball would be astronomically large (free groups at radius 20).

A component is *live* when it reaches the exploration horizon, the
finite-window stand-in for being infinite.
"""
from __future__ import annotations

import heapq
import json
import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any

import numpy as np
from scipy.sparse import csgraph

from .coarse import BoundedRegion, Window
from .errors import EmptyDomainError, InputError, ResourceError
from .spaces import Space, ball

INF = math.inf


def default_margin(K: float) -> int:
    return int(2 * math.ceil(K) + 4)


def _check_K(K):
    if K is None or (isinstance(K, float) and math.isnan(K)) or K < 0:
        raise InputError(f"K must be non-negative, got {K!r}")


@dataclass(frozen=True, eq=False)
class ComponentPartition:
    """Partition of ``window - forbidden`` into K-connected classes.

    Classes are sorted by, and named after, their lexicographically least
    canonical point.  ``labels[i]`` is the class of ``window.points[i]``
    (``-1`` inside the forbidden region).
    """

    window: Window = field(repr=False)
    forbidden: BoundedRegion
    K: float
    labels: np.ndarray = field(repr=False)
    ids: tuple
    live: tuple

    def __len__(self):
        return len(self.ids)

    @cached_property
    def classes(self) -> list[frozenset]:
        pts = self.window.points
        buckets: list[list] = [[] for _ in self.ids]
        for i in np.flatnonzero(self.labels >= 0).tolist():
            buckets[self.labels[i]].append(pts[i])
        return [frozenset(b) for b in buckets]

    @property
    def live_count(self) -> int:
        return sum(self.live)

    def class_of(self, p) -> int | None:
        i = self.window.index.get(p)
        if i is None or self.labels[i] < 0:
            return None
        return int(self.labels[i])

    def class_id(self, p) -> str | None:
        c = self.class_of(p)
        return None if c is None else self.ids[c]

    def to_json(self) -> dict:
        sizes = np.bincount(self.labels[self.labels >= 0], minlength=len(self.ids))
        return {
            "forbidden": {"center": self.window.names[self.window.locate(self.forbidden.center)],
                          "radius": self.forbidden.radius},
            "K": self.K,
            "classes": [{"id": c, "size": int(n), "live": bool(lv)}
                        for c, n, lv in zip(self.ids, sizes.tolist(), self.live)],
        }


def k_components(w: Window, forbidden: BoundedRegion, K: float = 1) -> ComponentPartition:
    """K-connected components of the window outside a ball around its origin.

    Points ``x, y`` are joined when ``d(x, y) <= K`` (distance in the
    window, so hops may pass over the forbidden ball).

    Raises
    ------
    EmptyDomainError
        If ``w.horizon <= forbidden.radius``.
    """
    _check_K(K)
    if forbidden.center != w.origin:
        raise InputError("the forbidden region must be centred at the window origin")
    if w.horizon <= forbidden.radius:
        raise EmptyDomainError(
            f"window horizon {w.horizon} does not exceed the forbidden radius {forbidden.radius}")
    outside = np.flatnonzero(w.radius > forbidden.radius)
    labels = np.full(len(w), -1, dtype=np.int64)
    if len(outside) == 0:
        return ComponentPartition(w, forbidden, K, labels, (), ())
    R = w.khop(K)
    sub = R[outside][:, outside]
    n, lab = csgraph.connected_components(sub, directed=False)

    ranks = w.name_rank[outside]
    best = np.full(n, np.iinfo(np.int64).max)
    np.minimum.at(best, lab, ranks)
    order = np.argsort(best, kind="stable")
    relabel = np.empty(n, dtype=np.int64)
    relabel[order] = np.arange(n)
    lab = relabel[lab]
    labels[outside] = lab

    by_rank = np.argsort(w.name_rank)
    names = w.names
    ids = tuple(names[by_rank[b]] for b in best[order].tolist())
    live = np.zeros(n, dtype=bool)
    live[np.unique(lab[w.radius[outside] >= w.horizon])] = True
    return ComponentPartition(w, forbidden, K, labels, ids, tuple(live.tolist()))


# ---------------------------------------------------------------------------
# chains


@dataclass(frozen=True)
class Chain:
    points: tuple
    K: float

    def __len__(self):
        return len(self.points)

    def reversed(self) -> "Chain":
        return Chain(self.points[::-1], self.K)


def chain_between(w: Window, x, y, K: float, forbidden: BoundedRegion) -> Chain | None:
    """A shortest K-chain from ``x`` to ``y`` avoiding ``forbidden``, if any."""
    _check_K(K)
    i, j = w.locate(x), w.locate(y)
    if w.radius[i] <= forbidden.radius or w.radius[j] <= forbidden.radius:
        raise InputError("chain endpoints must lie outside the forbidden region")
    outside = np.flatnonzero(w.radius > forbidden.radius)
    pos = {int(v): k for k, v in enumerate(outside)}
    sub = w.khop(K)[outside][:, outside]
    _, pred = csgraph.breadth_first_order(sub, pos[i], directed=False, return_predecessors=True)
    target = pos[j]
    if target != pos[i] and pred[target] < 0:
        return None
    path = [target]
    while path[-1] != pos[i]:
        path.append(int(pred[path[-1]]))
    pts = w.points
    return Chain(tuple(pts[outside[k]] for k in reversed(path)), K)


def chain_violations(space: Space, points, K: float, outside: float,
                     start=None, end=None) -> list[str]:
    """Reasons a point sequence fails to be a K-chain outside ``B(xi; outside)``.

    Uses only ``space.distance``, so it is independent of every search routine.
    """
    problems = []
    if not points:
        return ["chain is empty"]
    if start is not None and points[0] != start:
        problems.append(f"starts at {space.format_point(points[0])}, expected {space.format_point(start)}")
    if end is not None and points[-1] != end:
        problems.append(f"ends at {space.format_point(points[-1])}, expected {space.format_point(end)}")
    for k, p in enumerate(points):
        if space.norm(p) <= outside:
            problems.append(f"point {k} ({space.format_point(p)}) lies inside B(xi;{outside})")
    for k in range(len(points) - 1):
        d = space.distance(points[k], points[k + 1])
        if d > K:
            problems.append(f"hop {k}->{k + 1} has length {d} > K={K}")
    return problems


# ---------------------------------------------------------------------------
# lazy route


class _Norms(dict):
    def __init__(self, space):
        super().__init__()
        self.space = space

    def __missing__(self, p):
        v = self[p] = self.space.norm(p)
        return v


def khop_neighbours(space: Space, x, K: float, within: float = INF, norms=None) -> list:
    """Points other than ``x`` within K steps of it, along paths inside ``B(xi; within)``."""
    norms = norms if norms is not None else _Norms(space)
    steps = int(math.floor(K))
    if steps == 1:
        return [q for q in space.neighbours(x) if norms[q] <= within]
    seen = {x}
    layer = [x]
    for _ in range(steps):
        nxt = []
        for p in layer:
            for q in space.neighbours(p):
                if q not in seen and norms[q] <= within:
                    seen.add(q)
                    nxt.append(q)
        layer = nxt
    seen.discard(x)
    return list(seen)


def _search(space, x, K, outside, within, target=None, limit=None, norms=None):
    norms = norms if norms is not None else _Norms(space)
    if target is not None and space.closed_form_metric:
        return _astar(space, x, K, outside, within, target, limit, norms)
    pred = {x: None}
    queue = deque([x])
    while queue:
        p = queue.popleft()
        if p == target:
            break
        for q in khop_neighbours(space, p, K, within, norms):
            if q not in pred and norms[q] > outside:
                pred[q] = p
                queue.append(q)
        if limit is not None and len(pred) > limit:
            raise ResourceError(f"component search exceeded the point cap of {limit}", limit)
    return pred


def _astar(space, x, K, outside, within, target, limit, norms):
    # hops cover at most K, so ceil(d / K) is a consistent lower bound and
    # the chain found is still a shortest one
    def h(p):
        return math.ceil(space.distance(p, target) / K)

    pred = {x: None}
    cost = {x: 0}
    heap = [(h(x), 0, 0, x)]
    tick = 0
    done = set()
    while heap:
        _, g, _, p = heapq.heappop(heap)
        if p == target:
            break
        if p in done:
            continue
        done.add(p)
        for q in khop_neighbours(space, p, K, within, norms):
            if norms[q] <= outside or cost.get(q, math.inf) <= g + 1:
                continue
            cost[q] = g + 1
            pred[q] = p
            tick += 1
            heapq.heappush(heap, (g + 1 + h(q), g + 1, tick, q))
        if limit is not None and len(pred) > limit:
            raise ResourceError(f"component search exceeded the point cap of {limit}", limit)
    return pred


def find_chain(space: Space, x, y, K: float, outside: float, within: float = INF,
               limit: int | None = None) -> Chain | None:
    """BFS for a K-chain from ``x`` to ``y`` in ``outside < |p| <= within``."""
    norms = _Norms(space)
    if norms[x] <= outside or norms[y] <= outside:
        raise InputError("chain endpoints must lie outside the forbidden region")
    pred = _search(space, x, K, outside, within, target=y, limit=limit, norms=norms)
    if y not in pred:
        return None
    path = [y]
    while path[-1] != x:
        path.append(pred[path[-1]])
    return Chain(tuple(reversed(path)), K)


def component_of(space: Space, x, K: float, outside: float, within: float,
                 limit: int | None = None) -> frozenset:
    """The K-component of ``x`` in the annulus ``outside < |p| <= within``."""
    if within == INF:
        raise InputError("component_of needs a finite horizon")
    return frozenset(_search(space, x, K, outside, within, limit=limit))


def local_class(space: Space, x, K: float, r: float, horizon: float,
                limit: int | None = None) -> tuple[str, bool]:
    """Canonical id and liveness of the class of ``x`` outside ``B(xi; r)``.

    Agrees with :func:`k_components` on ``ball(xi, horizon)`` without
    materialising the ball.
    """
    comp = component_of(space, x, K, r, horizon, limit)
    fmt = space.format_point
    live = any(space.norm(p) >= horizon for p in comp)
    return min(fmt(p) for p in comp), live


# ---------------------------------------------------------------------------
# end profiles


def classify_counts(counts) -> str:
    """Growth class of a live-count vector.

    ``finite(n)`` when the last half is constant, ``uncountable-growth``
    for geometric growth (mean ratio at least 1.5 over the last half),
    ``countable-growth`` for slower increase, else ``inconclusive``.
    """
    counts = list(counts)
    if not counts:
        return "inconclusive"
    tail = counts[-math.ceil(len(counts) / 2):]
    if len(set(tail)) == 1:
        return f"finite({tail[0]})"
    nondecreasing = all(a <= b for a, b in zip(tail, tail[1:]))
    if not nondecreasing or tail[0] <= 0:
        return "inconclusive"
    ratio = (tail[-1] / tail[0]) ** (1 / (len(tail) - 1))
    return "uncountable-growth" if ratio >= 1.5 else "countable-growth"


@dataclass(frozen=True)
class EndProfile:
    counts: tuple
    classification: str
    K: float
    r_max: int
    horizon: int

    def to_json(self) -> dict:
        return {"counts": list(self.counts), "class": self.classification,
                "K": self.K, "rmax": self.r_max, "horizon": self.horizon}

    def to_csv(self) -> str:
        lines = ["r,count,classification"]
        lines += [f"{r},{c},{self.classification}" for r, c in enumerate(self.counts, start=1)]
        return "\n".join(lines) + "\n"


def _prepare(space, K, r_max, horizon_margin, center, cap):
    _check_K(K)
    if not isinstance(r_max, int) or r_max < 1:
        raise InputError(f"r_max must be a positive integer, got {r_max!r}")
    margin = default_margin(K) if horizon_margin is None else horizon_margin
    if margin < 1:
        raise InputError("horizon_margin must be at least 1")
    horizon = r_max + margin
    return ball(space, center, horizon, cap), horizon


def end_profile(space: Space, K: float = 1, r_max: int = 16, horizon_margin: int | None = None,
                center=None, cap: int | None = None) -> EndProfile:
    """Live component counts of ``X - B(xi; r)`` for ``r = 1..r_max``."""
    w, horizon = _prepare(space, K, r_max, horizon_margin, center, cap)
    counts = tuple(k_components(w, BoundedRegion(w.origin, r), K).live_count
                   for r in range(1, r_max + 1))
    return EndProfile(counts, classify_counts(counts), K, r_max, horizon)


# ---------------------------------------------------------------------------
# threads


@dataclass(frozen=True, eq=False)
class ThreadSystem:
    """The inverse system of components outside ``B(xi; r)``, ``r = 0..r_max``.

    ``parents[r][c]`` is the class at radius ``r`` containing class ``c``
    of radius ``r + 1``.  Threads are indexed by their live class at
    ``r_max`` and listed root-first.
    """

    window: Window = field(repr=False)
    K: float
    r_max: int
    partitions: tuple = field(repr=False)
    parents: tuple = field(repr=False)

    @property
    def horizon(self):
        return self.window.horizon

    @cached_property
    def threads(self) -> list[tuple]:
        top = self.partitions[-1]
        out = []
        for c in range(len(top)):
            if not top.live[c]:
                continue
            path = [c]
            for r in range(self.r_max - 1, -1, -1):
                path.append(int(self.parents[r][path[-1]]))
            out.append(tuple(self.partitions[r].ids[k] for r, k in enumerate(reversed(path))))
        return out

    @property
    def thread_ids(self) -> list[str]:
        return [t[-1] for t in self.threads]

    def __len__(self):
        return self.partitions[-1].live_count

    def thread_of(self, p) -> str | None:
        """Thread containing ``p``, or ``None`` if ``p`` is not in a live class at ``r_max``."""
        top = self.partitions[-1]
        c = top.class_of(p)
        if c is None or not top.live[c]:
            return None
        return top.ids[c]

    def to_json(self) -> dict:
        levels = []
        for r, part in enumerate(self.partitions):
            sizes = np.bincount(part.labels[part.labels >= 0], minlength=len(part.ids)).tolist()
            classes = []
            for c, cid in enumerate(part.ids):
                entry = {"id": cid, "size": sizes[c], "live": bool(part.live[c])}
                if r > 0:
                    entry["parent"] = self.partitions[r - 1].ids[int(self.parents[r - 1][c])]
                classes.append(entry)
            levels.append({"r": r, "classes": classes})
        return {"K": self.K, "rmax": self.r_max, "horizon": self.horizon,
                "threads": [list(t) for t in self.threads], "levels": levels}

    def to_dot(self) -> str:
        """The refinement forest of live classes in Graphviz syntax."""
        lines = ["digraph threads {", "  rankdir=TB;"]
        for r, part in enumerate(self.partitions):
            for c, cid in enumerate(part.ids):
                if part.live[c]:
                    lines.append(f'  "{r}:{cid}" [label="{cid}"];')
                    if r > 0:
                        pid = self.partitions[r - 1].ids[int(self.parents[r - 1][c])]
                        lines.append(f'  "{r - 1}:{pid}" -> "{r}:{cid}";')
        lines.append("}")
        return "\n".join(lines) + "\n"


def component_threads(space: Space, K: float = 1, r_max: int = 8,
                      horizon_margin: int | None = None, center=None,
                      cap: int | None = None) -> ThreadSystem:
    """Build the thread system; its thread count is the live count at ``r_max``."""
    w, _ = _prepare(space, K, r_max, horizon_margin, center, cap)
    return threads_from_window(w, K, r_max)


def threads_from_window(w: Window, K: float, r_max: int) -> ThreadSystem:
    parts = [k_components(w, BoundedRegion(w.origin, r), K) for r in range(r_max + 1)]
    parents = []
    for r in range(r_max):
        child, parent = parts[r + 1], parts[r]
        # any member of a child class witnesses its (unique) parent
        rep = np.full(len(child), -1, dtype=np.int64)
        idx = np.flatnonzero(child.labels >= 0)
        rep[child.labels[idx]] = idx
        parents.append(parent.labels[rep] if len(child) else np.empty(0, dtype=np.int64))
    return ThreadSystem(w, K, r_max, tuple(parts), tuple(parents))


def dumps(obj) -> str:
    return json.dumps(obj.to_json(), sort_keys=True)
