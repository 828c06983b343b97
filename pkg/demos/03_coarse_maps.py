"""Coarse maps act on ends, and close maps act the same way."""
from endslab import CoarseMap, InconclusiveError, IntegerGrid, IntegerLine, Subdivision, are_close, check_coarse, end_map
from endslab.maps import identity, is_bijection

Z = IntegerLine()

double = CoarseMap(Z, Z, {"kind": "affine", "a": 2})
print("x -> 2x coarse:", check_coarse(double).ok)
print("x -> x^2 coarse:", check_coarse(CoarseMap(Z, Z, lambda x: x * x)).ok)

shift = CoarseMap(Z, Z, {"kind": "affine", "a": 1, "b": 5})
print("id and x+5 close:", are_close(identity(Z), shift))

# |x| folds both ends of the line onto one
_, tgt, m = end_map(CoarseMap(Z, Z, {"kind": "abs"}))
print("|x| on ends:", m)

# vertices sit inside the subdivided graph as a coarse equivalence
G = Subdivision(Z)
inc = CoarseMap(Z, G, {"kind": "inclusion"})
ret = CoarseMap(G, Z, {"kind": "retraction"})
_, tgt, m = end_map(inc)
print("V -> G on ends:", m, "bijective:", is_bijection(m, tgt.thread_ids))
print("ret after inc close to id:", are_close(inc.then(ret), identity(Z)))

# projecting the one-ended grid onto a line has no well-defined end map
proj = CoarseMap(IntegerGrid(2), Z, lambda p: p[0])
try:
    end_map(proj)
except InconclusiveError as exc:
    print("projection Z^2 -> Z:", type(exc).__name__)
