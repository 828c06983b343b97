"""Coarse maps between spaces: probe-scale checks, closeness, induced maps on ends.

Bornologousness and properness quantify over the whole space, so both are
trend checks over three doubling probe windows; reports keep the raw data.

Map rules (JSON, mirroring sequence rules)::

    {"kind": "affine", "a": 2, "b": 0}            lattice maps, a may be a matrix
    {"kind": "substitution", "map": {"a": "ab"}}  generator substitution on words
    {"kind": "inclusion"}                         same canonical string in the target
    {"kind": "abs"}                               |x| on Z
    {"kind": "constant", "value": "0"}
    {"kind": "retraction"}                        subdivision -> base, nearest vertex
    {"kind": "compose", "maps": [r1, r2, ...]}    apply r1 first (needs "via" spaces)
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .components import ThreadSystem
from .errors import InconclusiveError, InputError
from .spaces import Space, Subdivision, as_space, ball

INF = math.inf


@dataclass(frozen=True, eq=False)
class CoarseMap:
    source: Space
    target: Space
    rule: dict | Callable = field(repr=False)
    based: bool = False

    def __post_init__(self):
        object.__setattr__(self, "_fn", _compile(self.rule, self.source, self.target))
        if self.based and self(self.source.basepoint) != self.target.basepoint:
            raise InputError("map is required to preserve basepoints but does not")

    def __call__(self, p):
        try:
            return self._fn(p)
        except InputError:
            raise
        except Exception as exc:
            raise InputError(f"map rule failed at {self.source.format_point(p)!r}: {exc}") from exc

    def then(self, g: "CoarseMap") -> "CoarseMap":
        """``g o self``."""
        if self.target != g.target and self.target != g.source:
            raise InputError("maps are not composable")
        f = self
        return CoarseMap(self.source, g.target, lambda p: g(f(p)))

    def to_json(self) -> dict:
        if callable(self.rule):
            raise InputError("a map with a Python rule cannot be serialised")
        return {"source": self.source.descriptor(), "target": self.target.descriptor(),
                "rule": self.rule}

    @classmethod
    def from_json(cls, doc: dict | str) -> "CoarseMap":
        if isinstance(doc, str):
            try:
                doc = json.loads(doc)
            except json.JSONDecodeError as exc:
                raise InputError(f"map descriptor is not valid JSON: {exc}") from None
        try:
            return cls(as_space(doc["source"]), as_space(doc["target"]), doc["rule"],
                       bool(doc.get("based", False)))
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed map descriptor: {exc}") from None


def identity(space: Space) -> CoarseMap:
    return CoarseMap(space, space, {"kind": "inclusion"})


def _compile(rule, source: Space, target: Space) -> Callable:
    if callable(rule):
        return lambda p: target.coerce(rule(p))
    if not isinstance(rule, dict) or "kind" not in rule:
        raise InputError(f"map rule must be an object with a 'kind', got {rule!r}")
    kind = rule["kind"]
    if kind == "inclusion":
        fmt, parse = source.format_point, target.parse_point
        if isinstance(target, Subdivision) and target.base == source:
            return lambda p: ("v", p)
        return lambda p: parse(fmt(p))
    if kind == "abs":
        return lambda p: target.coerce(abs(p))
    if kind == "constant":
        value = target.parse_point(rule["value"])
        return lambda p: value
    if kind == "affine":
        a, b = rule["a"], rule.get("b", 0)
        if isinstance(a, list):
            A = np.array(a, dtype=np.int64)
            bv = np.array(b if isinstance(b, list) else [b] * A.shape[0], dtype=np.int64)
            if A.ndim == 1:
                return lambda p: target.coerce(tuple(int(v) for v in A * np.array(p) + bv))
            return lambda p: target.coerce(tuple(int(v) for v in A @ np.array(p) + bv))
        if hasattr(source, "dim") and source.dim > 1:
            return lambda p: target.coerce(tuple(a * c + b for c in p))
        return lambda p: target.coerce(a * p + b)
    if kind == "substitution":
        table = dict(rule["map"])
        for ch, img in list(table.items()):
            table.setdefault(ch.swapcase(), img[::-1].swapcase())

        def sub(word):
            return target.multiply(*(table.get(ch, ch) for ch in word))
        return sub
    if kind == "retraction":
        if not isinstance(source, Subdivision):
            raise InputError("retraction maps need a subdivision source")
        return lambda x: x[1]
    if kind == "compose":
        maps = rule.get("maps")
        via = rule.get("via", [])
        if not isinstance(maps, list) or len(via) != len(maps) - 1:
            raise InputError("compose needs 'maps' and one intermediate space per junction in 'via'")
        spaces = [source] + [as_space(v) for v in via] + [target]
        fns = [_compile(m, spaces[k], spaces[k + 1]) for k, m in enumerate(maps)]

        def composite(p):
            for fn in fns:
                p = fn(p)
            return p
        return composite
    raise InputError(f"unknown map rule kind {kind!r}")


# ---------------------------------------------------------------------------
# probe-scale checks


def _probe_radii(probe_radius):
    if probe_radius < 2:
        raise InputError("probe_radius must be at least 2")
    return [max(1, probe_radius // 4), max(1, probe_radius // 2), probe_radius]


@dataclass(frozen=True)
class MapReport:
    radii: tuple
    bornologous_sups: tuple
    preimage_radii: dict
    bornologous_ok: bool
    proper_ok: bool

    @property
    def ok(self) -> bool:
        return self.bornologous_ok and self.proper_ok

    def to_json(self) -> dict:
        return {"radii": list(self.radii), "bornologous_sups": [_num(v) for v in self.bornologous_sups],
                "preimage_radii": {str(k): [_num(v) for v in vs] for k, vs in self.preimage_radii.items()},
                "bornologous_ok": self.bornologous_ok, "proper_ok": self.proper_ok, "ok": self.ok}


def _num(x):
    if x == INF:
        return "inf"
    return int(x) if float(x).is_integer() else float(x)


def check_coarse(f: CoarseMap, probe_radius: int = 16, K_in: float = 1,
                 cap: int | None = None) -> MapReport:
    """Trend check of bornologousness and properness on three doubling windows.

    Bornologous: the sup of ``d(f x, f y)`` over pairs with ``d(x, y) <= K_in``
    must stop growing between the two largest windows.  Proper: for each
    target radius ``rho`` up to the smallest probe radius, the largest
    source norm whose image lies in ``B(f(xi); rho)`` must stop growing and
    stay off the window boundary.
    """
    radii = _probe_radii(probe_radius)
    src, tgt = f.source, f.target
    w = ball(src, None, radii[-1], cap)
    images = [f(p) for p in w.points]
    centre = f(src.basepoint)
    dist_c = np.array([tgt.distance(centre, q) for q in images])

    R = w.khop(K_in).tocoo()
    keep = R.row < R.col
    rows, cols = R.row[keep], R.col[keep]
    pair_d = np.array([tgt.distance(images[a], images[b]) for a, b in zip(rows.tolist(), cols.tolist())])
    pair_r = np.maximum(w.radius[rows], w.radius[cols]) if len(rows) else np.zeros(0)
    sups = tuple(float(pair_d[pair_r <= rad].max()) if np.any(pair_r <= rad) else 0.0 for rad in radii)
    born_ok = bool(np.isfinite(sups[-1]) and sups[-1] == sups[-2])

    pre = {}
    proper_ok = True
    for rho in range(radii[0] + 1):
        vals = []
        for rad in radii:
            inside = (w.radius <= rad) & (dist_c <= rho)
            vals.append(float(w.radius[inside].max()) if np.any(inside) else 0.0)
        pre[rho] = tuple(vals)
        if vals[-1] != vals[-2] or vals[-1] >= radii[-1]:
            proper_ok = False
    return MapReport(tuple(radii), sups, pre, born_ok, proper_ok)


def are_close(f: CoarseMap, g: CoarseMap, probe_radius: int = 16,
              cap: int | None = None) -> tuple[bool, float]:
    """Whether ``sup d(f x, g x)`` stabilises over three doubling windows; returns the sup."""
    if f.source != g.source or f.target != g.target:
        raise InputError("closeness needs maps with the same source and target")
    radii = _probe_radii(probe_radius)
    w = ball(f.source, None, radii[-1], cap)
    d = np.array([f.target.distance(f(p), g(p)) for p in w.points])
    sups = [float(d[w.radius <= rad].max()) for rad in radii]
    close = bool(np.isfinite(sups[-1]) and sups[-1] == sups[-2])
    sup = sups[-1]
    return close, int(sup) if np.isfinite(sup) and float(sup).is_integer() else sup


def induced_end_map(f: CoarseMap, source: ThreadSystem, target: ThreadSystem) -> dict[str, str]:
    """Send each source thread to the target thread holding the images of its horizon points.

    Images falling outside the target window or inside ``B(eta; r_max)``
    are ignored; a thread none of whose images can be located, or whose
    images straddle two target threads, raises :class:`InconclusiveError`.
    """
    top = source.partitions[-1]
    w = source.window
    at_horizon = np.flatnonzero(w.radius >= w.horizon)
    by_class: dict[int, list] = {}
    for i in at_horizon.tolist():
        c = int(top.labels[i])
        if c >= 0 and top.live[c]:
            by_class.setdefault(c, []).append(w.points[i])
    out = {}
    for c, pts in sorted(by_class.items()):
        hits = {target.thread_of(f(p)) for p in pts} - {None}
        cid = top.ids[c]
        if not hits:
            raise InconclusiveError(f"no image of thread {cid} lands in a live target class; "
                                    "enlarge the target horizon")
        if len(hits) > 1:
            raise InconclusiveError(f"images of thread {cid} straddle target threads {sorted(hits)}")
        out[cid] = hits.pop()
    return out


def compose_end_maps(first: dict, second: dict) -> dict:
    """``second o first`` for thread maps given as dicts."""
    return {k: second[v] for k, v in first.items()}


def is_bijection(mapping: dict, codomain) -> bool:
    return sorted(mapping.values()) == sorted(codomain) and len(set(mapping.values())) == len(mapping)


def map_sequence(f: CoarseMap, s, step_bound: float | None = None):
    """The sequence ``f o s`` in the target space."""
    from .sequences import CoarseSequence
    bound = step_bound
    if bound is None:
        dist = f.target.distance
        pts = [f(s(i)) for i in range(64)]
        bound = max(dist(a, b) for a, b in zip(pts, pts[1:]))
    return CoarseSequence.from_callable(f.target, lambda i: f(s(i)), bound)


def end_map(f: CoarseMap, K: float = 1, r_max: int = 8, horizon_margin: int | None = None,
            cap: int | None = None):
    """Thread systems for source and target plus the induced map between them.

    The source horizon is widened (doubling the margin) until the images of
    its horizon points clear ``B(f(xi); r_max + K)``; the target horizon is
    then sized to contain every image with a default margin to spare.
    """
    from .components import component_threads, default_margin
    margin = default_margin(K) if horizon_margin is None else horizon_margin
    tnorm = f.target.norm
    # widen the source horizon until its images clear the target's innermost ball
    for _ in range(6):
        src = component_threads(f.source, K, r_max, margin, cap=cap)
        w = src.window
        edge = [f(w.points[i]) for i in np.flatnonzero(w.radius >= w.horizon).tolist()]
        if edge and min(tnorm(q) for q in edge) > r_max + K:
            break
        margin *= 2
    else:
        raise InconclusiveError("images of the source horizon never clear the target ball; "
                                "the map may not be proper")
    reach = max(tnorm(f(p)) for p in w.points)
    t_margin = max(margin, int(math.ceil(reach)) - r_max + default_margin(K))
    tgt = component_threads(f.target, K, r_max, t_margin, cap=cap)
    return src, tgt, induced_end_map(f, src, tgt)
