"""
Finite groups from Cayley tables
================================

Build the small groups the urn runs on, check a hand-made table, and
look at subgroups generated by a few elements.
"""

from groupurn.groups import (cyclic, dihedral, direct_product, format_cayley,
                             from_cayley_table, is_generating, subgroup_generated, symmetric)

# S3 with elements as one-line permutations; the identity is "123"
s3 = symmetric(3)
print(s3.labels)
print(s3.table)

# a transposition and a 3-cycle generate all of S3, the 3-cycle alone does not
t, c = s3.index("132"), s3.index("231")
print("<132, 231> has", len(subgroup_generated(s3, {t, c})), "elements")
print("<231> =", [s3.labels[i] for i in subgroup_generated(s3, {c})])
print("is {231} generating?", is_generating(s3, {c}))

# other constructors
for g in (cyclic(5), dihedral(4), direct_product(cyclic(2), cyclic(3))):
    print(g.order, "abelian" if g.is_abelian() else "non-abelian",
          sorted(g.element_order(i) for i in range(g.order)))

# tables given by hand are checked against the group axioms
try:
    from_cayley_table("abc", [[0, 2, 1], [2, 1, 0], [1, 0, 2]])
except ValueError as exc:
    print(type(exc).__name__, "-", exc)

# the text format read by `--group file:PATH`
print(format_cayley(cyclic(3)))
