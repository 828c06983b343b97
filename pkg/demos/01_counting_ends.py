"""Counting ends by counting live K-components outside growing balls.

For each space we remove B(xi; r) and count the K-components of what is
left that still reach the window boundary.  Constant counts mean finitely
many ends; growing counts point to infinitely many.
"""
from endslab import CombTree, FreeGroup, IntegerGrid, IntegerLine, WordTree, end_profile

SPACES = [
    ("integer line", IntegerLine(), 16, None),
    ("square grid", IntegerGrid(2), 12, None),
    ("comb tree", CombTree(), 12, None),
    ("binary tree", WordTree("01"), 8, None),
    # a free group has no dead ends, so a thin margin is enough
    ("free group F2", FreeGroup(2), 6, 2),
]

for name, space, r_max, margin in SPACES:
    prof = end_profile(space, K=1, r_max=r_max, horizon_margin=margin)
    print(f"{name:14s} {prof.classification:20s} {list(prof.counts)}")

# The line splits into two rays at every radius; the grid never splits.
# The comb gains one tooth per unit of radius, the trees multiply.
