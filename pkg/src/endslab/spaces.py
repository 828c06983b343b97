"""Lazily generated, locally finite graph spaces and ball enumeration.

A space only knows how to list the neighbours of a point, how to measure
graph distance (in closed form where one exists) and how to move between a
point and its canonical string.  Nothing is materialised until :func:`ball`
walks outward from a centre by breadth-first search.

Native point types:

* integer line and one-dimensional lattices: ``int``
* higher-dimensional lattices: ``tuple`` of ints
* free groups, word trees and the comb tree: reduced words as ``str``
  (lower case generators, upper case inverses, identity/root ``""``)
* finitely branching trees: ``tuple`` of child indices, root ``()``
"""
from __future__ import annotations

import itertools
import json
import math
import os
import re
from collections import deque
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from .coarse import Window
from .errors import InputError, ResourceError

DEFAULT_CAP = 10**6
NEIGHBOUR_CAP = 10_000
PROBE_RADIUS = 3

INF = math.inf

_LETTERS = "abcdefghijklmnopqrstuvwxyz"


def point_cap(cap: int | None = None) -> int:
    """Resolve the point cap: explicit argument, then ``ENDSLAB_CAP``, then default."""
    if cap is not None:
        return int(cap)
    env = os.environ.get("ENDSLAB_CAP")
    if env:
        try:
            return int(env)
        except ValueError:
            raise InputError(f"ENDSLAB_CAP must be an integer, got {env!r}") from None
    return DEFAULT_CAP


class Space:
    """Base class for a pointed, locally finite graph space.

    Subclasses provide :meth:`neighbours`, :meth:`format_point` and
    :meth:`parse_point`; :meth:`distance` defaults to a bounded
    bidirectional search and should be overridden by closed forms.
    """

    kind = "abstract"
    connected = True
    # cheap enough to serve as a search heuristic
    closed_form_metric = False

    def __init__(self, basepoint=None):
        self.basepoint = self.default_basepoint() if basepoint is None else self.coerce(basepoint)

    # -- points -------------------------------------------------------
    def default_basepoint(self):
        raise NotImplementedError

    def neighbours(self, p) -> tuple:
        raise NotImplementedError

    def format_point(self, p) -> str:
        return str(p)

    def parse_point(self, text: str):
        raise NotImplementedError

    def coerce(self, p):
        """Accept a native point or its canonical string; reject anything else."""
        if isinstance(p, str):
            return self.parse_point(p)
        return self.parse_point(self.format_point(p))

    # -- metric -------------------------------------------------------
    def distance(self, p, q) -> float:
        return _bfs_distance(self, p, q)

    def norm(self, p) -> float:
        return self.distance(self.basepoint, p)

    def descriptor(self) -> dict:
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({json.dumps(self.descriptor(), sort_keys=True)})"

    def __eq__(self, other):
        return isinstance(other, Space) and self.descriptor() == other.descriptor()

    def __hash__(self):
        return hash(json.dumps(self.descriptor(), sort_keys=True))


def _bfs_distance(space: Space, p, q, limit: int | None = None) -> float:
    """Bidirectional BFS; ``inf`` when the two points are not connected."""
    if p == q:
        return 0
    cap = point_cap(limit)
    front = {p: 0}
    back = {q: 0}
    qf, qb = deque([p]), deque([q])
    seen = 2
    while qf and qb:
        # expand the smaller frontier one full layer
        if len(qf) <= len(qb):
            queue, mine, other = qf, front, back
        else:
            queue, mine, other = qb, back, front
        best = INF
        for _ in range(len(queue)):
            x = queue.popleft()
            for y in space.neighbours(x):
                if y in other:
                    best = min(best, mine[x] + 1 + other[y])
                if y not in mine:
                    mine[y] = mine[x] + 1
                    queue.append(y)
                    seen += 1
        if best < INF:
            return best
        if seen > cap:
            raise ResourceError(f"distance search exceeded the point cap of {cap}", cap)
    return INF


# ---------------------------------------------------------------------------
# integer lattices


def _format_vector(p) -> str:
    if isinstance(p, (int, np.integer)):
        return str(int(p))
    return "(" + ",".join(str(int(c)) for c in p) + ")"


_INT_RE = re.compile(r"-?(0|[1-9][0-9]*)\Z")


def _parse_vector(text: str, dim: int):
    if dim == 1:
        if not _INT_RE.match(text) or text == "-0":
            raise InputError(f"not a canonical integer: {text!r}")
        return int(text)
    if not (text.startswith("(") and text.endswith(")")):
        raise InputError(f"not a canonical lattice point: {text!r}")
    parts = text[1:-1].split(",")
    if len(parts) != dim or any(not _INT_RE.match(c) or c == "-0" for c in parts):
        raise InputError(f"not a canonical point of Z^{dim}: {text!r}")
    return tuple(int(c) for c in parts)


class IntegerGrid(Space):
    """The Cayley graph of Z^d for the standard generators; distance is l1."""

    kind = "integer_grid"
    closed_form_metric = True

    def __init__(self, dim: int = 2, basepoint=None):
        if not isinstance(dim, int) or dim < 1:
            raise InputError(f"dim must be a positive integer, got {dim!r}")
        self.dim = dim
        super().__init__(basepoint)

    def default_basepoint(self):
        return 0 if self.dim == 1 else (0,) * self.dim

    def neighbours(self, p):
        if self.dim == 1:
            return (p + 1, p - 1)
        out = []
        for i in range(self.dim):
            for step in (1, -1):
                q = list(p)
                q[i] += step
                out.append(tuple(q))
        return tuple(out)

    def distance(self, p, q):
        if self.dim == 1:
            return abs(p - q)
        return sum(abs(a - b) for a, b in zip(p, q))

    def format_point(self, p):
        return _format_vector(p)

    def parse_point(self, text):
        return _parse_vector(text, self.dim)

    def coerce(self, p):
        if isinstance(p, str):
            return self.parse_point(p)
        if self.dim == 1 and isinstance(p, (int, np.integer)) and not isinstance(p, bool):
            return int(p)
        if self.dim > 1 and isinstance(p, (tuple, list)) and len(p) == self.dim:
            return tuple(int(c) for c in p)
        raise InputError(f"{p!r} is not a point of Z^{self.dim}")

    def descriptor(self):
        d = {"kind": self.kind, "dim": self.dim}
        if self.basepoint != self.default_basepoint():
            d["basepoint"] = self.format_point(self.basepoint)
        return d


class IntegerLine(IntegerGrid):
    kind = "integer_line"

    def __init__(self, basepoint=None):
        super().__init__(1, basepoint)

    def descriptor(self):
        d = {"kind": self.kind}
        if self.basepoint != 0:
            d["basepoint"] = self.format_point(self.basepoint)
        return d


class OffsetSpace(IntegerGrid):
    """Cayley graph of the subgroup of Z^d generated by a finite offset list.

    Only the component of the basepoint is reachable; points of other
    cosets are at infinite distance.
    """

    kind = "custom"

    def __init__(self, dim: int, offsets: Sequence, basepoint=None):
        offs = []
        for o in offsets:
            o = [o] if isinstance(o, (int, np.integer)) else list(o)
            if len(o) != dim or not all(isinstance(c, (int, np.integer)) for c in o):
                raise InputError(f"offset {o!r} is not an integer vector of length {dim}")
            if not any(o):
                continue
            offs.append(int(o[0]) if dim == 1 else tuple(int(c) for c in o))
        if not offs:
            raise InputError("offset list must contain a non-zero offset")
        self.offsets = tuple(dict.fromkeys(offs))
        super().__init__(dim, basepoint)
        self.connected = _generates_lattice(self.offsets, dim)

    def neighbours(self, p):
        if self.dim == 1:
            return tuple(p + o for o in self.offsets)
        return tuple(tuple(a + b for a, b in zip(p, o)) for o in self.offsets)

    def is_symmetric(self) -> bool:
        neg = {(-o if self.dim == 1 else tuple(-c for c in o)) for o in self.offsets}
        return neg == set(self.offsets)

    def distance(self, p, q):
        if self.dim == 1:
            return self._word_length(q - p)
        return self._word_length(tuple(b - a for a, b in zip(p, q)))

    def _word_length(self, v):
        # translation invariance: d(p, q) is the word length of q - p
        cache = self.__dict__.setdefault("_lengths", {})
        if v not in cache:
            zero = 0 if self.dim == 1 else (0,) * self.dim
            cache[v] = _bfs_distance(self, zero, v)
        return cache[v]

    def descriptor(self):
        offsets = [[o] if self.dim == 1 else list(o) for o in self.offsets]
        d = {"kind": "custom", "dim": self.dim,
             "adjacency_rule": {"kind": "offsets", "offsets": offsets}}
        if self.basepoint != self.default_basepoint():
            d["basepoint"] = self.format_point(self.basepoint)
        return d


def _generates_lattice(offsets, dim) -> bool:
    vecs = [[o] if dim == 1 else list(o) for o in offsets]
    g = 0
    for combo in itertools.combinations(vecs, dim):
        det = int(round(np.linalg.det(np.array(combo, dtype=float)))) if dim > 1 else combo[0][0]
        g = math.gcd(g, abs(det))
        if g == 1:
            return True
    return False


# ---------------------------------------------------------------------------
# free groups and trees of words


def free_reduce(word: str) -> str:
    """Freely reduce a word whose inverse letters are the upper case letters."""
    out: list[str] = []
    for ch in word:
        if out and out[-1] == ch.swapcase():
            out.pop()
        else:
            out.append(ch)
    return "".join(out)


def _common_prefix(u, v) -> int:
    n = 0
    for a, b in zip(u, v):
        if a != b:
            break
        n += 1
    return n


class FreeGroup(Space):
    """Cayley graph of the free group on ``rank`` generators and their inverses."""

    kind = "free_group"
    closed_form_metric = True

    def __init__(self, rank: int = 2, basepoint=None):
        if not isinstance(rank, int) or not 1 <= rank <= len(_LETTERS):
            raise InputError(f"rank must be an integer in 1..26, got {rank!r}")
        self.rank = rank
        self.generators = _LETTERS[:rank]
        self._alphabet = set(self.generators + self.generators.upper())
        self._steps = tuple(c for g in self.generators for c in (g, g.upper()))
        super().__init__(basepoint)

    def default_basepoint(self):
        return ""

    def neighbours(self, p):
        last = p[-1:].swapcase()
        return tuple(p[:-1] if c == last else p + c for c in self._steps)

    def distance(self, p, q):
        n = _common_prefix(p, q)
        return len(p) + len(q) - 2 * n

    def multiply(self, *words: str) -> str:
        return free_reduce("".join(words))

    def inverse(self, word: str) -> str:
        return word[::-1].swapcase()

    def parse_point(self, text):
        if not isinstance(text, str) or not set(text) <= self._alphabet:
            raise InputError(f"not a word over the generators of F_{self.rank}: {text!r}")
        if free_reduce(text) != text:
            raise InputError(f"word is not freely reduced: {text!r}")
        return text

    def descriptor(self):
        d = {"kind": self.kind, "rank": self.rank}
        if self.basepoint != "":
            d["basepoint"] = self.basepoint
        return d


class WordTree(Space):
    """The tree of all finite words over an alphabet, rooted at the empty word."""

    kind = "word_tree"
    closed_form_metric = True

    def __init__(self, alphabet: Iterable[str] = "ab", basepoint=None):
        letters = list(alphabet)
        if not letters or any(not isinstance(c, str) or len(c) != 1 for c in letters):
            raise InputError(f"alphabet must be a non-empty list of single characters, got {alphabet!r}")
        if len(set(letters)) != len(letters):
            raise InputError("alphabet letters must be distinct")
        self.alphabet = "".join(letters)
        super().__init__(basepoint)

    def default_basepoint(self):
        return ""

    def children(self, p) -> tuple:
        return tuple(p + c for c in self.alphabet)

    def neighbours(self, p):
        kids = self.children(p)
        return kids if not p else (p[:-1],) + kids

    def distance(self, p, q):
        return len(p) + len(q) - 2 * _common_prefix(p, q)

    def is_node(self, text: str) -> bool:
        return all(c in self.alphabet for c in text)

    def multiply(self, *words: str) -> str:
        word = "".join(words)
        if not self.is_node(word):
            raise InputError(f"{word!r} is not a node of the tree")
        return word

    def parse_point(self, text):
        if not isinstance(text, str) or not self.is_node(text):
            raise InputError(f"not a node of the {self.kind}: {text!r}")
        return text

    def descriptor(self):
        d = {"kind": self.kind, "alphabet": list(self.alphabet)}
        if self.basepoint != "":
            d["basepoint"] = self.basepoint
        return d


_COMB_RE = re.compile(r"a*b*\Z")


class CombTree(WordTree):
    """The subtree ``{a^n b^m}`` of the binary word tree.

    ``a^n`` has children ``a^(n+1)`` and ``a^n b``; a node ending in ``b``
    has the single child obtained by appending ``b``.
    """

    kind = "comb_tree"

    def __init__(self, basepoint=None):
        super().__init__("ab", basepoint)

    def children(self, p):
        if p.endswith("b"):
            return (p + "b",)
        return (p + "a", p + "b")

    def is_node(self, text):
        return bool(_COMB_RE.match(text))

    def descriptor(self):
        d = {"kind": self.kind}
        if self.basepoint != "":
            d["basepoint"] = self.basepoint
        return d


class BranchingTree(Space):
    """A rooted tree whose child counts come from a rule.

    ``child_rule`` may be an int (constant branching), a list of per-depth
    counts whose last entry repeats, a dict ``{"default": k, "by_depth":
    [...], "by_path": {"0.1": 0, ...}}`` or a Python callable ``node ->
    count``.  Nodes are tuples of child indices; ``"0.2.1"`` is the string
    form and ``""`` the root.
    """

    kind = "finitely_branching_tree"
    closed_form_metric = True

    def __init__(self, child_rule: Any = 2, basepoint=None):
        self.child_rule = child_rule
        self._count = _compile_child_rule(child_rule)
        super().__init__(basepoint)

    def default_basepoint(self):
        return ()

    def children(self, p):
        k = self._count(p)
        if not isinstance(k, (int, np.integer)) or k < 0:
            raise InputError(f"child rule returned {k!r} at node {self.format_point(p)!r}")
        if k > NEIGHBOUR_CAP:
            raise InputError(f"node {self.format_point(p)!r} has {k} children (infinite branching?)")
        return tuple(p + (i,) for i in range(int(k)))

    def neighbours(self, p):
        kids = self.children(p)
        return kids if not p else (p[:-1],) + kids

    def distance(self, p, q):
        return len(p) + len(q) - 2 * _common_prefix(p, q)

    def is_node(self, p) -> bool:
        return all(p[d] < len(self.children(p[:d])) for d in range(len(p)))

    def multiply(self, *paths) -> tuple:
        node = tuple(itertools.chain.from_iterable(
            self.parse_path(w) if isinstance(w, str) else tuple(w) for w in paths))
        if not self.is_node(node):
            raise InputError(f"{self.format_point(node)!r} is not a node of the tree")
        return node

    @staticmethod
    def parse_path(text: str) -> tuple:
        if text == "":
            return ()
        parts = text.split(".")
        if any(not _INT_RE.match(c) or c.startswith("-") for c in parts):
            raise InputError(f"not a tree path: {text!r}")
        return tuple(int(c) for c in parts)

    def format_point(self, p):
        return ".".join(str(i) for i in p)

    def parse_point(self, text):
        node = self.parse_path(text)
        if not self.is_node(node):
            raise InputError(f"{text!r} is not a node of the tree")
        return node

    def coerce(self, p):
        if isinstance(p, str):
            return self.parse_point(p)
        node = tuple(int(i) for i in p)
        if not self.is_node(node):
            raise InputError(f"{p!r} is not a node of the tree")
        return node

    def descriptor(self):
        if callable(self.child_rule):
            raise InputError("a tree with a Python child rule has no JSON descriptor")
        d = {"kind": self.kind, "child_rule": self.child_rule}
        if self.basepoint != ():
            d["basepoint"] = self.format_point(self.basepoint)
        return d

    def __hash__(self):
        return id(self) if callable(self.child_rule) else Space.__hash__(self)

    def __eq__(self, other):
        if callable(self.child_rule):
            return self is other
        return Space.__eq__(self, other)


def _compile_child_rule(rule) -> Callable[[tuple], int]:
    if callable(rule):
        return rule
    if isinstance(rule, bool):
        raise InputError(f"invalid child_rule {rule!r}")
    if isinstance(rule, int):
        if rule < 0:
            raise InputError("child_rule must be non-negative")
        return lambda node: rule
    if isinstance(rule, list):
        if not rule or any(not isinstance(k, int) or isinstance(k, bool) or k < 0 for k in rule):
            raise InputError(f"child_rule list must hold non-negative integers, got {rule!r}")
        counts = tuple(rule)
        return lambda node: counts[min(len(node), len(counts) - 1)]
    if isinstance(rule, dict):
        unknown = set(rule) - {"default", "by_depth", "by_path"}
        if unknown:
            raise InputError(f"unknown child_rule fields: {sorted(unknown)}")
        depths = rule.get("by_depth", [])
        if not isinstance(depths, list) or any(
                not isinstance(k, int) or isinstance(k, bool) or k < 0 for k in depths):
            raise InputError(f"by_depth must be a list of non-negative integers, got {depths!r}")
        depths = tuple(depths)
        default = rule.get("default", 1)
        if not isinstance(default, int) or default < 0:
            raise InputError("child_rule default must be a non-negative integer")
        by_path = {BranchingTree.parse_path(k): v for k, v in rule.get("by_path", {}).items()}
        for v in by_path.values():
            if not isinstance(v, int) or isinstance(v, bool) or v < 0:
                raise InputError("by_path counts must be non-negative integers")

        def count(node):
            if node in by_path:
                return by_path[node]
            # inside a dict, depths past the by_depth list fall back to the default
            return depths[len(node)] if len(node) < len(depths) else default

        return count
    raise InputError(f"invalid child_rule {rule!r}")


# ---------------------------------------------------------------------------
# custom graphs


class EdgeSpace(Space):
    """A finite graph given by an explicit undirected edge list on string points."""

    kind = "custom"

    def __init__(self, edges: Sequence[Sequence[str]], basepoint=None, points: Sequence[str] = ()):
        adj: dict[str, list[str]] = {p: [] for p in points}
        for e in edges:
            if len(e) != 2 or not all(isinstance(v, str) for v in e):
                raise InputError(f"edge {e!r} must be a pair of point strings")
            a, b = e
            adj.setdefault(a, [])
            adj.setdefault(b, [])
            if a != b and b not in adj[a]:
                adj[a].append(b)
                adj[b].append(a)
        if not adj:
            raise InputError("an edge-list space needs at least one point")
        self._adj = {k: tuple(sorted(v)) for k, v in adj.items()}
        self._edges = [list(e) for e in edges]
        self._points = list(points)
        super().__init__(basepoint)
        self.connected = len(_reach(self, self.basepoint)) == len(self._adj)

    def default_basepoint(self):
        return min(self._adj)

    def neighbours(self, p):
        return self._adj[p]

    def parse_point(self, text):
        if text not in self._adj:
            raise InputError(f"unknown point {text!r}")
        return text

    def descriptor(self):
        rule = {"kind": "edges", "edges": self._edges}
        if self._points:
            rule["points"] = self._points
        return {"kind": "custom", "adjacency_rule": rule, "basepoint": self.basepoint}


class CallableSpace(Space):
    """A space given by a Python neighbour function on string points."""

    kind = "custom"

    def __init__(self, neighbours: Callable[[str], Iterable[str]], basepoint: str,
                 distance: Callable[[str, str], float] | None = None):
        self._neighbours = neighbours
        self._distance = distance
        self.basepoint = basepoint

    def neighbours(self, p):
        return tuple(self._neighbours(p))

    def distance(self, p, q):
        if self._distance is not None:
            return self._distance(p, q)
        return _bfs_distance(self, p, q)

    def parse_point(self, text):
        if not isinstance(text, str):
            raise InputError(f"points of a callable space are strings, got {text!r}")
        return text

    def descriptor(self):
        raise InputError("a space with a Python adjacency rule has no JSON descriptor")

    def __hash__(self):
        return id(self)

    def __eq__(self, other):
        return self is other


def _reach(space: Space, start) -> set:
    seen = {start}
    queue = deque([start])
    while queue:
        for q in space.neighbours(queue.popleft()):
            if q not in seen:
                seen.add(q)
                queue.append(q)
    return seen


# ---------------------------------------------------------------------------
# subdivision: the vertex set V inside the realised graph G


class Subdivision(Space):
    """Barycentric subdivision of a graph space, measured in half-edges.

    Vertices keep their base string; the midpoint of the edge ``{p, q}`` is
    ``"[p|q]"`` with ``p`` before ``q`` in string order.  The vertex set of
    the base sits inside with every distance doubled, which makes the
    inclusion a coarse equivalence.
    """

    kind = "subdivision"

    def __init__(self, base: Space, basepoint=None):
        self.base = base
        self.closed_form_metric = base.closed_form_metric
        super().__init__(basepoint)

    def default_basepoint(self):
        return ("v", self.base.basepoint)

    def vertex(self, p):
        return ("v", p)

    def midpoint(self, p, q):
        fp, fq = self.base.format_point(p), self.base.format_point(q)
        return ("e", p, q) if fp <= fq else ("e", q, p)

    def neighbours(self, x):
        if x[0] == "v":
            return tuple(self.midpoint(x[1], q) for q in self.base.neighbours(x[1]))
        return (("v", x[1]), ("v", x[2]))

    def _ends(self, x):
        return (x[1],) if x[0] == "v" else (x[1], x[2])

    def distance(self, x, y):
        if x == y:
            return 0
        d = self.base.distance
        best = min(d(p, q) for p in self._ends(x) for q in self._ends(y))
        return 2 * best + (x[0] == "e") + (y[0] == "e")

    def format_point(self, x):
        f = self.base.format_point
        if x[0] == "v":
            return f(x[1])
        return f"[{f(x[1])}|{f(x[2])}]"

    def parse_point(self, text):
        if text.startswith("[") and text.endswith("]") and "|" in text:
            a, b = text[1:-1].split("|", 1)
            p, q = self.base.parse_point(a), self.base.parse_point(b)
            if a >= b or q not in self.base.neighbours(p):
                raise InputError(f"not a canonical edge midpoint: {text!r}")
            return ("e", p, q)
        return ("v", self.base.parse_point(text))

    def coerce(self, x):
        if isinstance(x, str):
            return self.parse_point(x)
        return self.parse_point(self.format_point(x))

    def descriptor(self):
        d = {"kind": self.kind, "base": self.base.descriptor()}
        if self.basepoint != self.default_basepoint():
            d["basepoint"] = self.format_point(self.basepoint)
        return d


# ---------------------------------------------------------------------------
# descriptors

_FIELDS = {
    "integer_line": set(),
    "integer_grid": {"dim"},
    "free_group": {"rank"},
    "word_tree": {"alphabet"},
    "comb_tree": set(),
    "finitely_branching_tree": {"child_rule"},
    "custom": {"adjacency_rule", "dim"},
    "subdivision": {"base"},
}


def parse_descriptor(text: str | dict, cap: int | None = None) -> Space:
    """Build a space from its JSON descriptor.

    Recognised fields are ``kind``, ``dim``, ``rank``, ``alphabet``,
    ``child_rule``, ``adjacency_rule`` and ``basepoint``.  Every space is
    probed on the ball of radius 3 around its basepoint; an asymmetric
    adjacency or a point with more than ``NEIGHBOUR_CAP`` neighbours is
    rejected.

    >>> parse_descriptor('{"kind": "free_group", "rank": 2}').neighbours("")
    ('a', 'A', 'b', 'B')
    """
    if isinstance(text, dict):
        doc = text
    else:
        try:
            doc = json.loads(text)
        except (TypeError, json.JSONDecodeError) as exc:
            raise InputError(f"descriptor is not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or "kind" not in doc:
        raise InputError("descriptor must be a JSON object with a 'kind' field")
    kind = doc["kind"]
    if kind not in _FIELDS:
        raise InputError(f"unknown space kind {kind!r}; expected one of {sorted(_FIELDS)}")
    extra = set(doc) - _FIELDS[kind] - {"kind", "basepoint"}
    if extra:
        raise InputError(f"unexpected fields for {kind}: {sorted(extra)}")
    base = doc.get("basepoint")
    if base is not None and not isinstance(base, str):
        raise InputError("basepoint must be a canonical point string")

    try:
        if kind == "integer_line":
            space = IntegerLine(base)
        elif kind == "integer_grid":
            space = IntegerGrid(doc.get("dim", 2), base)
        elif kind == "free_group":
            space = FreeGroup(doc.get("rank", 2), base)
        elif kind == "word_tree":
            space = WordTree(doc.get("alphabet", ["a", "b"]), base)
        elif kind == "comb_tree":
            space = CombTree(base)
        elif kind == "finitely_branching_tree":
            if "child_rule" not in doc:
                raise InputError("finitely_branching_tree needs a child_rule")
            space = BranchingTree(doc["child_rule"], base)
        elif kind == "subdivision":
            if "base" not in doc:
                raise InputError("subdivision needs a base descriptor")
            space = Subdivision(parse_descriptor(doc["base"], cap), base)
        else:
            space = _parse_custom(doc, base)
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed {kind} descriptor: {exc}") from None
    probe_space(space, PROBE_RADIUS, cap)
    return space


def _parse_custom(doc: dict, base):
    rule = doc.get("adjacency_rule")
    if not isinstance(rule, dict) or "kind" not in rule:
        raise InputError("custom spaces need an adjacency_rule object with a 'kind'")
    if rule["kind"] == "offsets":
        offsets = rule.get("offsets")
        if not isinstance(offsets, list) or not offsets:
            raise InputError("offsets rule needs a non-empty 'offsets' list")
        dim = doc.get("dim", len(offsets[0]) if isinstance(offsets[0], list) else 1)
        return OffsetSpace(dim, offsets, base)
    if rule["kind"] == "edges":
        edges = rule.get("edges")
        if not isinstance(edges, list):
            raise InputError("edges rule needs an 'edges' list")
        return EdgeSpace(edges, base, rule.get("points", ()))
    raise InputError(f"unknown adjacency_rule kind {rule['kind']!r}")


def probe_space(space: Space, radius: int = PROBE_RADIUS, cap: int | None = None) -> None:
    """Check symmetry and finite branching on a ball around the basepoint."""
    limit = point_cap(cap)
    seen = {space.basepoint: 0}
    queue = deque([space.basepoint])
    while queue:
        p = queue.popleft()
        nbrs = space.neighbours(p)
        if len(nbrs) > NEIGHBOUR_CAP:
            raise InputError(
                f"point {space.format_point(p)!r} has {len(nbrs)} neighbours "
                f"(above {NEIGHBOUR_CAP}; infinite branching?)")
        for q in nbrs:
            if p not in space.neighbours(q):
                raise InputError(
                    f"asymmetric adjacency: {space.format_point(q)!r} is a neighbour of "
                    f"{space.format_point(p)!r} but not conversely")
            if q not in seen and seen[p] < radius:
                seen[q] = seen[p] + 1
                if len(seen) > limit:
                    raise ResourceError(f"probe ball exceeded the point cap of {limit}", limit)
                queue.append(q)


def as_space(space: Space | str | dict) -> Space:
    if isinstance(space, Space):
        return space
    return parse_descriptor(space)


# ---------------------------------------------------------------------------
# ball enumeration


def ball(space: Space, center=None, r: float = 0, cap: int | None = None) -> Window:
    """All points within distance ``r`` of ``center``, found by BFS.

    The result is a :class:`~endslab.coarse.Window` whose ``horizon`` is
    ``r``, whose points are listed in BFS order and whose edges are the
    graph edges among them.

    Raises
    ------
    InputError
        If ``r`` is negative or ``center`` is not a canonical point.
    ResourceError
        If more than ``cap`` points would be enumerated.
    """
    if r is None or r < 0:
        raise InputError(f"radius must be non-negative, got {r!r}")
    center = space.basepoint if center is None else space.coerce(center)
    limit = point_cap(cap)
    depth = {center: 0}
    order = [center]
    i = 0
    while i < len(order):
        p = order[i]
        i += 1
        d = depth[p]
        if d + 1 > r:
            continue
        for q in space.neighbours(p):
            if q not in depth:
                depth[q] = d + 1
                order.append(q)
                if len(order) > limit:
                    raise ResourceError(
                        f"ball of radius {r} exceeds the point cap of {limit} points", limit)
    index = {p: k for k, p in enumerate(order)}
    rows, cols = [], []
    for k, p in enumerate(order):
        for q in space.neighbours(p):
            j = index.get(q)
            if j is not None:
                rows.append(k)
                cols.append(j)
    radius = np.fromiter((depth[p] for p in order), dtype=float, count=len(order))
    return Window.from_graph(center, r, order, rows, cols, radius=radius, space=space)


def sphere(space: Space, center=None, r: int = 0, cap: int | None = None) -> list:
    """Points at distance exactly ``r`` from ``center``."""
    w = ball(space, center, r, cap)
    return [p for p, d in zip(w.points, w.radius) if d == r]
