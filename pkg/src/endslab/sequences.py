"""Coarse sequences: finitary encodings, prefix validation, subsequence witnesses.

A sequence is a rule ``i -> point`` plus a declared step bound.  Rules come
in three JSON-encodable kinds and one opaque kind:

``affine``    ``s(i) = a*i + b`` on a lattice (``a``, ``b`` ints or vectors)
``word_ray``  ``s(i) = head * period**i`` in a word space (free group,
              word tree, comb tree, branching tree)
``explicit``  a finite ``prefix`` of point strings, then ``period`` repeated
``callable``  any Python function; results are flagged prefix-scale only
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .errors import InputError
from .spaces import Space, as_space


@dataclass(frozen=True, eq=False)
class CoarseSequence:
    space: Space = field(repr=False)
    rule: dict | Callable[[int], Any]
    step_bound: float = 1

    def __post_init__(self):
        if self.step_bound is None or self.step_bound < 0:
            raise InputError(f"step_bound must be non-negative, got {self.step_bound!r}")
        if not callable(self.rule):
            rule = json.loads(json.dumps(self.rule)) if isinstance(self.rule, dict) else self.rule
            _check_rule(self.space, rule)
            object.__setattr__(self, "rule", rule)
        object.__setattr__(self, "_memo", {})

    @property
    def closed_form(self) -> bool:
        """False for opaque callables and finite explicit prefixes."""
        if callable(self.rule):
            return False
        return self.rule["kind"] != "explicit" or bool(self.rule.get("period"))

    @property
    def basepoint(self):
        return self.space.basepoint

    def __call__(self, i: int):
        memo = self._memo
        if i in memo:
            return memo[i]
        if i < 0:
            raise InputError(f"sequence index must be non-negative, got {i}")
        try:
            p = self._evaluate(i)
        except InputError:
            raise
        except Exception as exc:
            raise InputError(f"sequence rule failed at index {i}: {exc}") from exc
        if len(memo) < 1_000_000:
            memo[i] = p
        return p

    def _evaluate(self, i):
        rule, space = self.rule, self.space
        if callable(rule):
            return space.coerce(rule(i))
        kind = rule["kind"]
        if kind == "affine":
            a, b = rule["a"], rule["b"]
            if isinstance(a, list):
                return tuple(x * i + y for x, y in zip(a, b))
            return a * i + b
        if kind == "word_ray":
            return space.multiply(rule["head"], *([rule["period"]] * i))
        pre, per = rule["prefix"], rule.get("period") or []
        if i < len(pre):
            return space.parse_point(pre[i])
        if not per:
            raise InputError(f"explicit sequence has no element {i} (prefix length {len(pre)})")
        return space.parse_point(per[(i - len(pre)) % len(per)])

    def prefix(self, n: int) -> list:
        return [self(i) for i in range(n)]

    def to_json(self) -> dict:
        if callable(self.rule):
            raise InputError("a sequence with a Python rule cannot be serialised")
        return {"rule": self.rule, "step_bound": _num(self.step_bound)}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, doc: dict | str, space) -> "CoarseSequence":
        if isinstance(doc, str):
            try:
                doc = json.loads(doc)
            except json.JSONDecodeError as exc:
                raise InputError(f"sequence is not valid JSON: {exc}") from None
        if not isinstance(doc, dict) or "rule" not in doc:
            raise InputError("sequence JSON needs a 'rule' object")
        extra = set(doc) - {"rule", "step_bound"}
        if extra:
            raise InputError(f"unexpected sequence fields: {sorted(extra)}")
        return cls(as_space(space), doc["rule"], doc.get("step_bound", 1))

    # convenience constructors
    @classmethod
    def affine(cls, space, a, b=0, step_bound=None):
        if isinstance(a, (tuple, list)):
            a, b = list(a), list(b) if isinstance(b, (tuple, list)) else [b] * len(a)
            bound = sum(abs(x) for x in a)
        else:
            bound = abs(a)
        return cls(space, {"kind": "affine", "a": a, "b": b},
                   bound if step_bound is None else step_bound)

    @classmethod
    def word_ray(cls, space, period: str, head: str = "", step_bound=None):
        if not isinstance(period, str):
            period = space.format_point(tuple(period))
        if not isinstance(head, str):
            head = space.format_point(tuple(head))
        length = len(space.parse_path(period)) if hasattr(space, "parse_path") else len(period)
        bound = length if step_bound is None else step_bound
        return cls(space, {"kind": "word_ray", "head": head, "period": period}, bound)

    @classmethod
    def explicit(cls, space, points: Sequence, period: Sequence = (), step_bound=1):
        fmt = space.format_point
        pre = [p if isinstance(p, str) else fmt(p) for p in points]
        per = [p if isinstance(p, str) else fmt(p) for p in period]
        return cls(space, {"kind": "explicit", "prefix": pre, "period": per}, step_bound)

    @classmethod
    def from_callable(cls, space, fn, step_bound=1):
        return cls(space, fn, step_bound)


def _num(x):
    return int(x) if float(x).is_integer() else float(x)


def _check_rule(space, rule):
    if not isinstance(rule, dict) or "kind" not in rule:
        raise InputError(f"sequence rule must be an object with a 'kind', got {rule!r}")
    kind = rule["kind"]
    fields = {"affine": {"a", "b"}, "word_ray": {"head", "period"}, "explicit": {"prefix", "period"}}
    if kind not in fields:
        raise InputError(f"unknown sequence rule kind {kind!r}")
    extra = set(rule) - fields[kind] - {"kind"}
    if extra:
        raise InputError(f"unexpected fields in {kind} rule: {sorted(extra)}")
    if kind == "affine":
        if not hasattr(space, "dim") or space.kind in ("subdivision",):
            raise InputError("affine rules need a lattice space")
        rule.setdefault("b", 0 if space.dim == 1 else [0] * space.dim)
        a, b = rule.get("a"), rule["b"]
        if space.dim == 1:
            ok = all(isinstance(v, int) and not isinstance(v, bool) for v in (a, b))
        else:
            ok = all(isinstance(v, list) and len(v) == space.dim
                     and all(isinstance(c, int) for c in v) for v in (a, b))
        if not ok:
            raise InputError(f"affine coefficients do not match Z^{space.dim}: {rule!r}")
    elif kind == "word_ray":
        if not hasattr(space, "multiply"):
            raise InputError(f"word_ray rules need a word space, not {space.kind}")
        for k in ("head", "period"):
            if not isinstance(rule.get(k, ""), str):
                raise InputError(f"word_ray {k} must be a string")
        rule.setdefault("head", "")
        rule.setdefault("period", "")
    else:
        if not isinstance(rule.get("prefix"), list) or not isinstance(rule.get("period", []), list):
            raise InputError("explicit rules need 'prefix' and 'period' lists of point strings")
        for p in rule["prefix"] + rule.get("period", []):
            if not isinstance(p, str):
                raise InputError(f"explicit sequence points must be canonical strings, got {p!r}")
        rule.setdefault("period", [])


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class CoarseReport:
    """Prefix-scale evidence for properness and bornologousness.

    Passing is necessary, not sufficient: both properties quantify over the
    whole infinite sequence.
    """

    prefix_len: int
    max_step: float
    step_bound: float
    first_violation: int | None
    escape: dict
    failed_radius: int | None
    prefix_scale_only: bool
    note: str = "prefix-scale check: necessary, not sufficient"

    @property
    def bornologous_ok(self) -> bool:
        return self.first_violation is None

    @property
    def proper_ok(self) -> bool:
        return self.failed_radius is None

    @property
    def ok(self) -> bool:
        return self.bornologous_ok and self.proper_ok

    def to_json(self) -> dict:
        return {
            "prefix_len": self.prefix_len, "max_step": _num(self.max_step),
            "step_bound": _num(self.step_bound), "bornologous_ok": self.bornologous_ok,
            "first_violation": self.first_violation, "proper_ok": self.proper_ok,
            "escape": {str(r): n for r, n in self.escape.items()},
            "failed_radius": self.failed_radius, "prefix_scale_only": self.prefix_scale_only,
            "note": self.note,
        }


def escape_indices(norms: Sequence[float], radii) -> dict:
    """For each radius, the least ``N`` with ``norms[i] > r`` for all ``N <= i < len``.

    ``None`` when no non-empty tail of the prefix clears the radius.
    """
    norms = np.asarray(norms, dtype=float)
    n = len(norms)
    sufmin = np.minimum.accumulate(norms[::-1])[::-1] if n else norms
    out = {}
    for r in radii:
        ok = np.flatnonzero(sufmin > r)
        out[r] = int(ok[0]) if len(ok) else None
    return out


def validate_coarse(s: CoarseSequence, prefix_len: int = 100, r_probe: int = 16) -> CoarseReport:
    if prefix_len < 2:
        raise InputError("prefix_len must be at least 2")
    space = s.space
    pts = s.prefix(prefix_len)
    steps = [space.distance(a, b) for a, b in zip(pts, pts[1:])]
    max_step = max(steps)
    first = next((i for i, d in enumerate(steps) if d > s.step_bound), None)
    esc = escape_indices([space.norm(p) for p in pts], range(r_probe + 1))
    failed = next((r for r, n in esc.items() if n is None), None)
    return CoarseReport(prefix_len, max_step, s.step_bound, first, esc, failed, not s.closed_form)


def is_subsequence(s, t, prefix_len: int, search_len: int | None = None) -> list[int] | None:
    """Greedy least-match embedding ``phi`` with ``s(i) == t(phi(i))``.

    ``s`` and ``t`` may be sequences or plain lists.  Only ``t[:search_len]``
    is searched (default ``16 * prefix_len``).  Greedy leftmost matching
    finds an embedding whenever one exists inside the searched prefix.
    """
    if prefix_len < 1:
        raise InputError("prefix_len must be at least 1")
    search_len = 16 * prefix_len if search_len is None else search_len
    get_s = s if callable(s) else s.__getitem__
    get_t = t if callable(t) else t.__getitem__
    if not callable(t):
        search_len = min(search_len, len(t))
    if not callable(s) and len(s) < prefix_len:
        raise InputError("s is shorter than prefix_len")
    phi = []
    j = 0
    for i in range(prefix_len):
        target = get_s(i)
        while j < search_len and get_t(j) != target:
            j += 1
        if j >= search_len:
            return None
        phi.append(j)
        j += 1
    return phi


def compose_embeddings(phi: Sequence[int], psi: Sequence[int]) -> list[int] | None:
    """``psi o phi``: if ``s`` embeds in ``t`` by phi and ``t`` in ``u`` by psi."""
    if phi and phi[-1] >= len(psi):
        return None
    return [psi[k] for k in phi]
