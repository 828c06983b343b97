"""Deciding whether two sequences go to the same end, with checkable evidence."""
import json

from endslab import (CoarseSequence, CombTree, FreeGroup, IntegerLine, build_witness,
                     epsilon_equivalent, verify, verify_witness)

Z = IntegerLine()
s = CoarseSequence.affine(Z, 1)                    # 0, 1, 2, ...
t = CoarseSequence.affine(Z, 2, step_bound=2)      # 0, 2, 4, ...

cert = epsilon_equivalent(s, t, K=1, r_max=8)
print("i vs 2i:", cert.verdict, "N_r =", cert.N)
for e in cert.entries[:3]:
    print(f"  r={e.r}: chain {list(e.chain)} avoids B(0;{e.r})")

# the certificate is plain JSON and re-checks without the search code
doc = json.loads(json.dumps(cert.to_json()))
print("re-verified:", verify(doc).ok)

# one corrupted chain point is caught
doc["entries"][4]["chain"][0] = "-1"
print("corrupted copy:", verify(doc).ok, verify(doc).failures[:1])

# a common supersequence visiting both, still escaping every ball
w = build_witness(s, t, cert)
print("witness prefix:", list(w.points[:12]), "ok:", verify_witness(w, s, t).ok)

# opposite rays: refuted with the two separated points named
ref = epsilon_equivalent(s, CoarseSequence.affine(Z, -1), K=1, r_max=8)
print("i vs -i:", ref.reason, "at r =", ref.r_fail, (ref.x, ref.y), (ref.class_x, ref.class_y))

# the same questions in trees and free groups
T = CombTree()
print("comb spine vs first tooth:",
      type(epsilon_equivalent(CoarseSequence.word_ray(T, "a"),
                              CoarseSequence.word_ray(T, "b", head="a"), 1, 12)).__name__)
F = FreeGroup(2)
print("a^i vs a^(2i) in F2:",
      type(epsilon_equivalent(CoarseSequence.word_ray(F, "a"),
                              CoarseSequence.word_ray(F, "aa"), 1, 12)).__name__)
