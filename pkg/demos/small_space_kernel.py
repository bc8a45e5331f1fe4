"""A walk through the smallest interesting space.

Two tasks, three machines, every task costs 3 in total and every machine
receives 2.  There are seven such matrices; the unit-move chain visits them
all with equal long-run frequency.

    python demos/small_space_kernel.py
"""

from fractions import Fraction

import numpy as np

from costgen import ChainConfig, TableSpace, enumerate_space, transition_matrix, walk
from costgen.chain import walk_batch

space = TableSpace((3, 3), (2, 2, 2))
states = enumerate_space(space)
print(f"{len(states)} matrices with row sums (3, 3) and column sums (2, 2, 2)")
for s in states:
    print(" ", s.tolist())

# The exact kernel, with rational entries.  From the all-ones matrix every
# other state is one move away, each with probability 1/6.
states, P = transition_matrix(space, "unit", exact=True)
c = next(k for k, s in enumerate(states) if (s == 1).all())
print("\nfrom the all-ones matrix:", [str(P[c, y]) for y in range(len(states))])
assert all(P[x, y] == P[y, x] for x in range(7) for y in range(7))

# Returning to the centre: the probability after n + 1 steps has a closed form.
row = np.array([Fraction(int(k == c)) for k in range(7)], dtype=object)
print("\nsteps  P(back at centre)  closed form")
for n in range(6):
    row = row.dot(P)
    print(f"{n + 1:5d}  {str(row[c]):>17}  {Fraction(1, 7) * (1 - Fraction(-1, 6) ** n)}")

# A single seeded chain, then many chains at once.
M = walk(space, np.ones((2, 3), dtype=int), ChainConfig(steps=25, mode="unit", seed=1))
print("\nafter 25 unit moves:", M.tolist())

rng = np.random.default_rng(0)
ends = walk_batch(space, np.ones((20_000, 2, 3), dtype=int), 50, "unit", rng)
index = {s.tobytes(): k for k, s in enumerate(states)}
freq = np.bincount([index[e.tobytes()] for e in ends], minlength=7) / len(ends)
print("end-state frequencies over 20 000 chains:", np.round(freq, 3))
