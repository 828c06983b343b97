"""Interleave two epsilon-equivalent sequences into one common supersequence.

Given a verified certificate with indices ``N_0 < N_1 < ...`` and chains
``u^r`` from ``s(N_r)`` to ``t(N_r)``, the witness is built in rounds.
Round ``r`` has an *active* sequence ``A`` (``s`` on even rounds, ``t`` on
odd ones) and a passive one ``B``:

1. run ``A`` forward from where it last stopped up to ``N_r``;
2. cross ``u^r`` (reversed when ``A`` is ``t``) to ``B(N_r)``;
3. run ``B`` backward to where it last stopped.

After the last round the passive sequence runs forward once more to
``N_r``.  Every index of each sequence is visited going forward exactly
once, which gives the two subsequence embeddings; backward runs stay in
tails that already clear the previous ball, so the escape radius grows
with the rounds.  Consecutive points are at most
``max(K_s, K_t, K)`` apart.

The construction fixes the turnaround indices itself (``N_r`` and the
previous stop), rather than the mixed chain-length/sequence indices one
sometimes sees in written versions of this argument.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .epsilon import EpsCertificate, verify_certificate
from .errors import InputError
from .sequences import CoarseSequence, escape_indices
from .spaces import as_space


@dataclass(frozen=True, eq=False)
class Witness:
    points: tuple
    s_index: tuple
    t_index: tuple
    escape: tuple
    K: float
    s: CoarseSequence = field(repr=False)
    t: CoarseSequence = field(repr=False)

    @property
    def space(self):
        return self.s.space

    @property
    def r_probe(self) -> int:
        return len(self.escape) - 1

    @property
    def step_bound(self) -> float:
        return max(self.s.step_bound, self.t.step_bound, self.K)

    def __len__(self):
        return len(self.points)

    def as_sequence(self) -> CoarseSequence:
        return CoarseSequence.explicit(self.space, self.points, step_bound=self.step_bound)

    def to_json(self) -> dict:
        return {
            "type": "witness",
            "space": self.space.descriptor(),
            "s": self.s.to_json(),
            "t": self.t.to_json(),
            "sequence": self.as_sequence().to_json(),
            "s_index": list(self.s_index),
            "t_index": list(self.t_index),
            "escape": list(self.escape),
            "K": self.K,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, doc: dict | str) -> "Witness":
        if isinstance(doc, str):
            doc = json.loads(doc)
        try:
            space = as_space(doc["space"])
            seq = doc["sequence"]["rule"]
            pts = tuple(space.parse_point(p) for p in seq["prefix"])
            return cls(pts, tuple(doc["s_index"]), tuple(doc["t_index"]), tuple(doc["escape"]),
                       doc["K"], CoarseSequence.from_json(doc["s"], space),
                       CoarseSequence.from_json(doc["t"], space))
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed witness document: {exc}") from None

    def replace_point(self, k: int, p) -> "Witness":
        pts = list(self.points)
        pts[k] = p
        return Witness(tuple(pts), self.s_index, self.t_index, self.escape, self.K, self.s, self.t)


def build_witness(s: CoarseSequence, t: CoarseSequence, cert: EpsCertificate) -> Witness:
    """The common supersequence of ``s`` and ``t`` described by ``cert``.

    Raises
    ------
    InputError
        If the indices ``N_r`` do not strictly increase or the certificate
        does not verify.
    """
    Ns = [e.N for e in cert.entries]
    if not Ns:
        raise InputError("certificate has no entries")
    if any(a >= b for a, b in zip(Ns, Ns[1:])):
        raise InputError(f"certificate indices N_r must strictly increase, got {Ns}")
    if cert.s is not s and cert.s.to_json() != s.to_json():
        raise InputError("certificate was issued for a different s")
    if cert.t is not t and cert.t.to_json() != t.to_json():
        raise InputError("certificate was issued for a different t")
    report = verify_certificate(cert)
    if not report.ok:
        raise InputError("certificate does not verify: " + "; ".join(report.failures[:3]))

    last = Ns[-1]
    space = s.space
    if all(s(i) == t(i) for i in range(last + 1)):
        pts = tuple(s(i) for i in range(last + 1))
        ident = tuple(range(last + 1))
        return Witness(pts, ident, ident, _escapes(space, pts, len(Ns) - 1), cert.K, s, t)

    seqs = (s, t)
    maps: tuple[list, list] = ([], [])
    stop = [0, 0]
    pts: list = []

    def visit(which, i, embed):
        pts.append(seqs[which](i))
        if embed:
            maps[which].append(len(pts) - 1)

    for r, entry in enumerate(cert.entries):
        A = r % 2
        B = 1 - A
        N = entry.N
        first = stop[A] + 1 if pts else 0
        for i in range(first, N + 1):
            visit(A, i, True)
        chain = entry.chain if A == 0 else entry.chain[::-1]
        pts.extend(chain[1:])
        for i in range(N - 1, stop[B] - 1, -1):
            visit(B, i, False)
        if not maps[B]:
            # B(0) is first reached at the bottom of this backward run
            maps[B].append(len(pts) - 1)
        stop[A] = N
    B = len(cert.entries) % 2
    for i in range(stop[B] + 1, last + 1):
        visit(B, i, True)

    pts = tuple(pts)
    return Witness(pts, tuple(maps[0]), tuple(maps[1]), _escapes(space, pts, len(Ns) - 1),
                   cert.K, s, t)


def _escapes(space, pts, r_top):
    esc = escape_indices([space.norm(p) for p in pts], range(r_top + 1))
    if any(v is None for v in esc.values()):
        raise InputError("witness does not escape every probed ball")
    return tuple(esc[r] for r in range(r_top + 1))


@dataclass(frozen=True)
class WitnessReport:
    subsequence_ok: bool
    bornologous_ok: bool
    proper_ok: bool
    max_step: float
    step_bound: float
    failed_radii: tuple
    failures: tuple

    @property
    def ok(self) -> bool:
        return self.subsequence_ok and self.bornologous_ok and self.proper_ok

    def to_json(self) -> dict:
        return {"ok": self.ok, "subsequence_ok": self.subsequence_ok,
                "bornologous_ok": self.bornologous_ok, "proper_ok": self.proper_ok,
                "max_step": self.max_step, "step_bound": self.step_bound,
                "failed_radii": list(self.failed_radii), "failures": list(self.failures)}


def verify_witness(w: Witness, s: CoarseSequence, t: CoarseSequence,
                   r_probe: int | None = None) -> WitnessReport:
    """Re-check a witness: embeddings, step bound and escape at every probed radius."""
    space = s.space
    pts = w.points
    fails = []

    sub_ok = True
    for name, seq, phi in (("s", s, w.s_index), ("t", t, w.t_index)):
        if not phi:
            fails.append(f"{name} index map is empty")
            sub_ok = False
            continue
        for i, k in enumerate(phi):
            if not 0 <= k < len(pts):
                fails.append(f"{name} index map sends {i} outside the witness")
                sub_ok = False
            elif pts[k] != seq(i):
                fails.append(f"witness[{k}] is not {name}({i})")
                sub_ok = False
            if i and k <= phi[i - 1]:
                fails.append(f"{name} index map is not increasing at {i}")
                sub_ok = False

    bound = max(s.step_bound, t.step_bound, w.K)
    steps = [space.distance(a, b) for a, b in zip(pts, pts[1:])]
    max_step = max(steps, default=0)
    born_ok = max_step <= bound
    if not born_ok:
        k = next(i for i, d in enumerate(steps) if d > bound)
        fails.append(f"step {k}->{k + 1} has length {steps[k]} > {bound}")

    r_probe = w.r_probe if r_probe is None else r_probe
    norms = [space.norm(p) for p in pts]
    bad = []
    for r in range(r_probe + 1):
        e = w.escape[r] if r < len(w.escape) else None
        if e is None or not 0 <= e < len(pts):
            bad.append(r)
            fails.append(f"no escape index for r={r}")
            continue
        k = next((j for j in range(e, len(pts)) if norms[j] <= r), None)
        if k is not None:
            bad.append(r)
            fails.append(f"witness[{k}] re-enters B(xi;{r}) after escape index {e}")
    return WitnessReport(sub_ok, born_ok, not bad, max_step, bound, tuple(bad), tuple(fails))
