"""Independent reference computations for the test suite.

Nothing here imports the library: balls come from closed-form enumeration,
distances from closed-form metrics, and K-components from a dense
transitive closure of the K-hop relation.
"""
import itertools

import numpy as np


# --- point sets ------------------------------------------------------------

def lattice_ball(dim, r):
    pts = []
    for v in itertools.product(range(-r, r + 1), repeat=dim):
        if sum(map(abs, v)) <= r:
            pts.append(v[0] if dim == 1 else v)
    return pts


def reduced_words(rank, r):
    """All freely reduced words of length <= r over a,A,b,B,..."""
    gens = [chr(ord("a") + k) for k in range(rank)]
    letters = gens + [g.upper() for g in gens]
    words = [""]
    frontier = [""]
    for _ in range(r):
        nxt = []
        for w in frontier:
            for c in letters:
                if w and w[-1] == c.swapcase():
                    continue
                nxt.append(w + c)
        words += nxt
        frontier = nxt
    return words


def all_words(alphabet, r):
    out = []
    for n in range(r + 1):
        out += ["".join(t) for t in itertools.product(alphabet, repeat=n)]
    return out


def comb_nodes(r):
    return ["a" * n + "b" * m for n in range(r + 1) for m in range(r + 1 - n)]


def branching_nodes(children, r):
    """Root paths (tuples) of a tree where node ``p`` has ``children(p)`` children."""
    out, frontier = [()], [()]
    for _ in range(r):
        frontier = [p + (k,) for p in frontier for k in range(children(p))]
        out += frontier
    return out


# --- metrics -----------------------------------------------------------------

def l1(x, y):
    if isinstance(x, int):
        return abs(x - y)
    return sum(abs(a - b) for a, b in zip(x, y))


def free_reduce(word):
    stack = []
    for c in word:
        if stack and stack[-1] == c.swapcase():
            stack.pop()
        else:
            stack.append(c)
    return "".join(stack)


def free_distance(x, y):
    inv = "".join(c.swapcase() for c in reversed(x))
    return len(free_reduce(inv + y))


def tree_distance(x, y):
    k = 0
    while k < min(len(x), len(y)) and x[k] == y[k]:
        k += 1
    return len(x) + len(y) - 2 * k


# --- components ------------------------------------------------------------

def distance_table(points, metric):
    n = len(points)
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            D[i, j] = D[j, i] = metric(points[i], points[j])
    return D


def closure(adj):
    """Reflexive-transitive closure of a boolean matrix by repeated squaring."""
    R = adj.astype(np.float64) + np.eye(len(adj))
    R = (R > 0).astype(np.float64)
    while True:
        R2 = ((R @ R) > 0).astype(np.float64)
        if np.array_equal(R2, R):
            return R > 0
        R = R2


def components(points, norms, D, r, K, horizon):
    """Partition of the points with norm > r into K-hop classes.

    Returns ``{frozenset(points): live}`` where live means some member has
    norm >= horizon.
    """
    keep = [i for i, n in enumerate(norms) if n > r]
    if not keep:
        return {}
    sub = D[np.ix_(keep, keep)] <= K
    reach = closure(sub)
    out = {}
    seen = set()
    for a in range(len(keep)):
        if a in seen:
            continue
        members = np.flatnonzero(reach[a]).tolist()
        seen.update(members)
        cls = frozenset(points[keep[m]] for m in members)
        out[cls] = any(norms[keep[m]] >= horizon for m in members)
    return out


def live_counts(points, norms, D, K, horizon, radii):
    return [sum(components(points, norms, D, r, K, horizon).values()) for r in radii]


def bfs_distances(points, neighbours):
    """All-pairs graph distances among ``points`` by BFS from each one."""
    index = {p: k for k, p in enumerate(points)}
    n = len(points)
    D = np.full((n, n), np.inf)
    for s in range(n):
        D[s, s] = 0
        frontier = [points[s]]
        d = 0
        while frontier:
            d += 1
            nxt = []
            for p in frontier:
                for q in neighbours(p):
                    k = index.get(q)
                    if k is not None and D[s, k] == np.inf:
                        D[s, k] = d
                        nxt.append(q)
            frontier = nxt
    return D


class DisjointSet:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def grid_annulus_live(dim, r, horizon):
    """Live unit-step components of {r < |v|_1 <= horizon} in Z^dim, by union-find."""
    pts = [p for p in lattice_ball(dim, horizon) if l1(p, (0,) * dim if dim > 1 else 0) > r]
    if dim == 1:
        pts = [(p,) for p in pts]
    ds = DisjointSet(pts)
    present = set(pts)
    for p in pts:
        for k in range(dim):
            q = p[:k] + (p[k] + 1,) + p[k + 1:]
            if q in present:
                ds.union(p, q)
    live = {ds.find(p) for p in pts if sum(map(abs, p)) == horizon}
    return len(live)
