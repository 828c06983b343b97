"""Scale-bounded decision of epsilon-equivalence, with replayable evidence.

Two coarse sequences are epsilon-equivalent when one threshold ``K`` works
for every radius ``r``: past some index ``N_r`` both tails lie in a single
K-connected component of ``X - B(xi; r)``.  :func:`epsilon_equivalent`
fixes ``K`` first, then for ``r = 0..r_max`` picks ``N_r``, searches a
K-chain joining ``s(N_r)`` to ``t(N_r)`` outside the ball, and checks that
each prefix tail is itself K-chained outside the ball.  Success yields an
:class:`EpsCertificate`; the least failing radius yields an
:class:`EpsRefutation`.

Both objects serialise to JSON and are re-checked by :func:`verify`, which
uses nothing but the space's distance function (certificates) or a fresh
ball window with :func:`~endslab.components.k_components` (refutations).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .coarse import BoundedRegion
from .components import chain_violations, default_margin, find_chain, k_components, local_class
from .errors import InputError, ResourceError
from .sequences import CoarseSequence, escape_indices
from .spaces import as_space, ball, point_cap

MAX_PREFIX = 100_000


@dataclass(frozen=True)
class EpsEntry:
    r: int
    N: int
    chain: tuple


@dataclass(frozen=True, eq=False)
class EpsCertificate:
    """Evidence that ``s`` and ``t`` are K-equivalent at radii ``0..r_max``.

    ``tail_chains[name][i]`` joins ``seq(i)`` to ``seq(i + 1)`` whenever that
    step exceeds ``K``; shorter steps are K-hops already.  Each stored chain
    avoids the largest ball whose tail contains index ``i``.
    """

    s: CoarseSequence = field(repr=False)
    t: CoarseSequence = field(repr=False)
    K: float
    entries: tuple
    prefix_len: int
    tail_chains: dict = field(repr=False)
    horizon_margin: int = 0

    verdict = "equivalent"

    @property
    def space(self):
        return self.s.space

    @property
    def r_max(self) -> int:
        return self.entries[-1].r if self.entries else -1

    @property
    def N(self) -> list[int]:
        return [e.N for e in self.entries]

    def chain(self, r: int) -> tuple:
        return self.entries[r].chain

    def swap(self) -> "EpsCertificate":
        """The certificate for ``(t, s)``: every chain reversed."""
        entries = tuple(EpsEntry(e.r, e.N, e.chain[::-1]) for e in self.entries)
        tails = {"s": self.tail_chains["t"], "t": self.tail_chains["s"]}
        return replace(self, s=self.t, t=self.s, entries=entries, tail_chains=tails)

    def to_json(self) -> dict:
        fmt = self.space.format_point
        return {
            "type": "certificate",
            "space": self.space.descriptor(),
            "s": self.s.to_json(),
            "t": self.t.to_json(),
            "K": _num(self.K),
            "prefix_len": self.prefix_len,
            "horizon_margin": self.horizon_margin,
            "entries": [{"r": e.r, "N": e.N, "chain": [fmt(p) for p in e.chain]}
                        for e in self.entries],
            "tail_chains": {name: {str(i): [fmt(p) for p in ch] for i, ch in sorted(d.items())}
                            for name, d in sorted(self.tail_chains.items())},
        }


@dataclass(frozen=True, eq=False)
class EpsRefutation:
    """Two points that must share a K-component outside ``B(xi; r_fail)`` but do not.

    ``reason`` is ``"separated"`` when ``x = s(index)``, ``y = t(index)``;
    ``"tail-split"`` when ``x = seq(index)``, ``y = seq(index + 1)`` for the
    sequence named by ``which``.  The claim is relative to ``K`` and to the
    window ``B(xi; horizon)``; it never asserts absolute non-equivalence.
    """

    s: CoarseSequence = field(repr=False)
    t: CoarseSequence = field(repr=False)
    K: float
    r_fail: int
    reason: str
    which: str
    index: int
    x: object
    y: object
    class_x: str
    class_y: str
    horizon: int

    verdict = "refuted"

    @property
    def space(self):
        return self.s.space

    def to_json(self) -> dict:
        fmt = self.space.format_point
        return {
            "type": "refutation",
            "space": self.space.descriptor(),
            "s": self.s.to_json(),
            "t": self.t.to_json(),
            "K": _num(self.K),
            "r_fail": self.r_fail,
            "reason": self.reason,
            "which": self.which,
            "index": self.index,
            "x": fmt(self.x),
            "y": fmt(self.y),
            "class_x": self.class_x,
            "class_y": self.class_y,
            "horizon": self.horizon,
        }


def _num(x):
    return int(x) if float(x).is_integer() else float(x)


def dumps(obj) -> str:
    return json.dumps(obj.to_json(), sort_keys=True)


# ---------------------------------------------------------------------------
# the procedure


def _working_prefix(s, t, target, margin, prefix_len):
    if prefix_len is not None:
        if prefix_len < 2:
            raise InputError("prefix_len must be at least 2")
        return prefix_len
    norm = s.space.norm
    for i in range(MAX_PREFIX):
        if norm(s(i)) > target and norm(t(i)) > target:
            return i + margin + 1
    raise InputError(
        f"the sequences do not both leave B(xi;{target}) within {MAX_PREFIX} terms "
        "(properness failure or no common horizon)")


def _check_steps(seq, name, P):
    dist = seq.space.distance
    for i in range(P - 1):
        d = dist(seq(i), seq(i + 1))
        if d > seq.step_bound:
            raise InputError(
                f"{name} is not bornologous with its declared step bound {seq.step_bound}: "
                f"step {i}->{i + 1} has length {d}")


def radius_indices(norm_s, norm_t, K, r_max):
    """``N_r`` for ``r = 0..r_max``: least index past ``N_(r-1)`` with both
    tails outside ``B(xi; r + K)``; ``None`` where the prefix runs out."""
    both = np.minimum(np.asarray(norm_s, dtype=float), np.asarray(norm_t, dtype=float))
    esc = escape_indices(both, [r + K for r in range(r_max + 1)])
    out, prev = [], -1
    for r in range(r_max + 1):
        n = esc[r + K]
        if n is None or max(n, prev + 1) >= len(both):
            out.append(None)
            break
        n = max(n, prev + 1)
        out.append(n)
        prev = n
    return out


def epsilon_equivalent(s: CoarseSequence, t: CoarseSequence, K: float = 1, r_max: int = 16,
                       horizon_margin: int | None = None, prefix_len: int | None = None,
                       cap: int | None = None):
    """Certificate or refutation for ``s ~ t`` with the single threshold ``K``.

    Parameters
    ----------
    K : float
        The uniform threshold, fixed before the radius loop.
    r_max : int
        Radii ``0..r_max`` are probed.
    horizon_margin : int, optional
        Chain searches stay inside ``B(xi; h)`` with ``h`` the larger endpoint
        norm plus this margin (default ``2K + 4``).
    prefix_len : int, optional
        Length of the prefixes whose tails are checked; chosen automatically
        so that both sequences clear ``B(xi; r_max + K + margin)``.

    Raises
    ------
    InputError
        If the sequences live in different spaces, break their declared step
        bounds on the prefix, or never share a horizon (properness failure).
    """
    if s.space != t.space:
        raise InputError("s and t must live in the same space")
    if K is None or K < 1:
        raise InputError(f"K must be at least 1, got {K!r}")
    if not isinstance(r_max, int) or r_max < 0:
        raise InputError(f"r_max must be a non-negative integer, got {r_max!r}")
    space = s.space
    margin = default_margin(K) if horizon_margin is None else horizon_margin
    limit = point_cap(cap)
    P = _working_prefix(s, t, r_max + K + margin, margin, prefix_len)
    _check_steps(s, "s", P)
    _check_steps(t, "t", P)

    seqs = {"s": s, "t": t}
    norms = {name: [space.norm(q(i)) for i in range(P)] for name, q in seqs.items()}
    Ns = radius_indices(norms["s"], norms["t"], K, r_max)
    if Ns[-1] is None:
        bad = len(Ns) - 1
        raise InputError(f"the sequence tails do not both clear B(xi;{bad + K}) on a prefix of {P} "
                         "terms (properness failure or no common horizon)")

    failures = []  # (r, reason, which, index, x, y, horizon)
    entries = []
    for r, N in enumerate(Ns):
        x, y = s(N), t(N)
        h = max(norms["s"][N], norms["t"][N], r) + margin
        chain = find_chain(space, x, y, K, r, h, limit)
        if chain is None:
            failures.append((r, "separated", "pair", N, x, y, h))
            break
        entries.append(EpsEntry(r, N, chain.points))
    r_stop = failures[0][0] if failures else r_max + 1

    tails: dict = {"s": {}, "t": {}}
    for name, q in seqs.items():
        nrm = norms[name]
        for i in range(Ns[0], P - 1):
            a, b = q(i), q(i + 1)
            if space.distance(a, b) <= K:
                continue
            deepest = max(r for r, N in enumerate(Ns) if N <= i)
            deepest = min(deepest, r_stop - 1)
            if deepest < 0:
                continue
            h = max(nrm[i], nrm[i + 1], deepest) + margin
            ch = find_chain(space, a, b, K, deepest, h, limit)
            if ch is not None:
                tails[name][i] = ch.points
                continue
            r_bad = next(r for r in range(deepest + 1)
                         if find_chain(space, a, b, K, r, h, limit) is None)
            failures.append((r_bad, "tail-split", name, i, a, b, h))
            r_stop = min(r_stop, r_bad)

    if failures:
        r, reason, which, index, x, y, h = min(failures, key=lambda f: (f[0], f[1] != "separated"))
        cx, _ = local_class(space, x, K, r, h, limit)
        cy, _ = local_class(space, y, K, r, h, limit)
        return EpsRefutation(s, t, K, r, reason, which, index, x, y, cx, cy, h)
    return EpsCertificate(s, t, K, tuple(entries), P, tails, margin)


def epsilon_search_K(s: CoarseSequence, t: CoarseSequence, K_max: int = 8, r_max: int = 16,
                     horizon_margin: int | None = None, prefix_len: int | None = None,
                     cap: int | None = None):
    """Least ``K`` in ``1..K_max`` with a certificate, else the refutation at ``K_max``."""
    if K_max is None or K_max < 1:
        raise InputError(f"K_max must be at least 1, got {K_max!r}")
    result = None
    for K in range(1, int(K_max) + 1):
        result = epsilon_equivalent(s, t, K, r_max, horizon_margin, prefix_len, cap)
        if isinstance(result, EpsCertificate):
            return result
    return result


# ---------------------------------------------------------------------------
# algebra of certificates


def _tail_walk(seq, a, b, chains):
    """Points from ``seq(a)`` to ``seq(b)`` along the tail, long steps via stored chains."""
    if a == b:
        return [seq(a)]
    lo, hi = min(a, b), max(a, b)
    pts = [seq(lo)]
    for i in range(lo, hi):
        ch = chains.get(i)
        pts.extend(ch[1:] if ch is not None else [seq(i + 1)])
    return pts if a < b else pts[::-1]


def concatenate(c1: EpsCertificate, c2: EpsCertificate) -> EpsCertificate:
    """Certificate for ``(s, u)`` from ones for ``(s, t)`` and ``(t, u)``.

    Uses ``K' = max(K1, K2)`` and ``N_r = max(N1_r, N2_r)``; the new chain at
    radius ``r`` walks the tails of s and t between the old endpoints.
    """
    if c1.t.dumps() != c2.s.dumps() if not callable(c1.t.rule) else c1.t is not c2.s:
        raise InputError("certificates do not share the middle sequence")
    r_max = min(c1.r_max, c2.r_max)
    K = max(c1.K, c2.K)
    s, t, u = c1.s, c1.t, c2.t
    entries = []
    for r in range(r_max + 1):
        n1, n2 = c1.entries[r].N, c2.entries[r].N
        N = max(n1, n2)
        path = _tail_walk(s, N, n1, c1.tail_chains["s"])
        path += list(c1.entries[r].chain[1:])
        path += _tail_walk(t, n1, n2, c1.tail_chains["t"])[1:]
        path += list(c2.entries[r].chain[1:])
        path += _tail_walk(u, n2, N, c2.tail_chains["t"])[1:]
        entries.append(EpsEntry(r, N, tuple(path)))
    tails = {"s": dict(c1.tail_chains["s"]), "t": dict(c2.tail_chains["t"])}
    P = min(c1.prefix_len, c2.prefix_len)
    return EpsCertificate(s, u, K, tuple(entries), P, tails, max(c1.horizon_margin, c2.horizon_margin))


# ---------------------------------------------------------------------------
# verification


@dataclass(frozen=True)
class VerifyReport:
    ok: bool
    kind: str
    failures: tuple = ()
    route: str = ""

    def __bool__(self):
        return self.ok

    def to_json(self) -> dict:
        doc = {"ok": self.ok, "kind": self.kind, "failures": list(self.failures)}
        if self.route:
            doc["route"] = self.route
        return doc


def verify_certificate(cert: EpsCertificate) -> VerifyReport:
    """Replay every chain and tail step against the space's distance function."""
    space = cert.space
    K = cert.K
    fails = []
    if not cert.entries:
        fails.append("certificate has no entries")
    prev = -1
    for k, e in enumerate(cert.entries):
        if e.r != k:
            fails.append(f"entry {k} is labelled r={e.r}")
        if e.N <= prev:
            fails.append(f"entry r={e.r}: N={e.N} does not exceed N={prev} of the previous radius")
        prev = e.N
        if e.N >= cert.prefix_len:
            fails.append(f"entry r={e.r}: N={e.N} lies beyond the prefix")
            continue
        for msg in chain_violations(space, list(e.chain), K, e.r, cert.s(e.N), cert.t(e.N)):
            fails.append(f"entry r={e.r} chain: {msg}")
    if fails:
        return VerifyReport(False, "certificate", tuple(fails))

    Ns = [e.N for e in cert.entries]
    for name, seq in (("s", cert.s), ("t", cert.t)):
        chains = cert.tail_chains.get(name, {})
        for i in sorted(chains):
            if not Ns[0] <= i < cert.prefix_len - 1:
                fails.append(f"{name} tail chain at index {i} is outside the checked tail")
        for i in range(Ns[0], cert.prefix_len):
            deepest = max(r for r, N in enumerate(Ns) if N <= i)
            p = seq(i)
            if space.norm(p) <= deepest:
                fails.append(f"{name}({i}) re-enters B(xi;{deepest})")
            if i == cert.prefix_len - 1:
                continue
            q = seq(i + 1)
            if i in chains:
                for msg in chain_violations(space, list(chains[i]), K, deepest, p, q):
                    fails.append(f"{name} tail chain {i}->{i + 1}: {msg}")
            elif space.distance(p, q) > K:
                fails.append(f"{name} tail step {i}->{i + 1} exceeds K={K} with no chain")
    return VerifyReport(not fails, "certificate", tuple(fails))


def verify_refutation(ref: EpsRefutation, cap: int | None = None) -> VerifyReport:
    """Confirm that the two witnessing points are separated outside ``B(xi; r_fail)``.

    The window route rebuilds ``ball(xi, horizon)`` and partitions it with
    :func:`~endslab.components.k_components`.  When that ball exceeds the
    point cap (large free-group horizons) the lazy route explores the
    K-components of both points inside the annulus instead.
    """
    space = ref.space
    fails = []
    if ref.reason == "separated":
        expect = (ref.s(ref.index), ref.t(ref.index))
    elif ref.reason == "tail-split" and ref.which in ("s", "t"):
        seq = ref.s if ref.which == "s" else ref.t
        expect = (seq(ref.index), seq(ref.index + 1))
    else:
        return VerifyReport(False, "refutation", (f"unknown reason {ref.reason!r}/{ref.which!r}",))
    if (ref.x, ref.y) != expect:
        fails.append("the witnessing points do not match the sequences at the stated index")
    if ref.horizon <= ref.r_fail:
        fails.append("horizon does not exceed the failing radius")
    if fails:
        return VerifyReport(False, "refutation", tuple(fails))
    try:
        w = ball(space, None, ref.horizon, cap)
    except ResourceError:
        w = None
    if w is not None:
        route = "window"
        part = k_components(w, BoundedRegion(w.origin, ref.r_fail), ref.K)
        cx, cy = part.class_id(ref.x), part.class_id(ref.y)
    else:
        route = "lazy"
        norm = space.norm
        if not all(ref.r_fail < norm(p) <= ref.horizon for p in (ref.x, ref.y)):
            cx = cy = None
        else:
            try:
                limit = point_cap(cap)
                cx, _ = local_class(space, ref.x, ref.K, ref.r_fail, ref.horizon, limit)
                cy, _ = local_class(space, ref.y, ref.K, ref.r_fail, ref.horizon, limit)
            except ResourceError as exc:
                return VerifyReport(False, "refutation", (f"cannot explore the annulus: {exc}",), route)
    if cx is None or cy is None:
        fails.append("a witnessing point is inside the forbidden ball or outside the window")
    elif cx == cy:
        fails.append(f"the points share the class {cx} at r={ref.r_fail}, K={ref.K}")
    elif (cx, cy) != (ref.class_x, ref.class_y):
        fails.append(f"class ids {cx}/{cy} differ from the recorded {ref.class_x}/{ref.class_y}")
    return VerifyReport(not fails, "refutation", tuple(fails), route)


def verify(obj, cap: int | None = None) -> VerifyReport:
    if isinstance(obj, (dict, str)):
        obj = load(obj)
    if isinstance(obj, EpsCertificate):
        return verify_certificate(obj)
    if isinstance(obj, EpsRefutation):
        return verify_refutation(obj, cap)
    from .witness import Witness, verify_witness
    if isinstance(obj, Witness):
        rep = verify_witness(obj, obj.s, obj.t, obj.r_probe)
        return VerifyReport(rep.ok, "witness", tuple(rep.failures))
    raise InputError(f"cannot verify an object of type {type(obj).__name__}")


def load(doc: dict | str):
    """Parse a certificate, refutation or witness document."""
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise InputError(f"document is not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or "type" not in doc:
        raise InputError("document needs a 'type' field")
    kind = doc["type"]
    if kind == "witness":
        from .witness import Witness
        return Witness.from_json(doc)
    try:
        space = as_space(doc["space"])
        s = CoarseSequence.from_json(doc["s"], space)
        t = CoarseSequence.from_json(doc["t"], space)
        parse = space.parse_point
        if kind == "certificate":
            entries = tuple(EpsEntry(int(e["r"]), int(e["N"]), tuple(parse(p) for p in e["chain"]))
                            for e in doc["entries"])
            tails = {name: {int(i): tuple(parse(p) for p in ch) for i, ch in d.items()}
                     for name, d in doc.get("tail_chains", {}).items()}
            tails.setdefault("s", {})
            tails.setdefault("t", {})
            return EpsCertificate(s, t, doc["K"], entries, int(doc["prefix_len"]), tails,
                                  int(doc.get("horizon_margin", 0)))
        if kind == "refutation":
            return EpsRefutation(s, t, doc["K"], int(doc["r_fail"]), doc["reason"], doc["which"],
                                 int(doc["index"]), parse(doc["x"]), parse(doc["y"]),
                                 doc["class_x"], doc["class_y"], int(doc["horizon"]))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"malformed {kind} document: {exc}") from None
    raise InputError(f"unknown document type {kind!r}")
