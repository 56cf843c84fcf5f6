import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from groupurn.groups import (
    MAX_ORDER,
    CayleyFormatError,
    ElementSet,
    GroupTooLarge,
    MissingInverse,
    NoIdentity,
    NonAssociative,
    NotLatinSquare,
    cyclic,
    dihedral,
    direct_product,
    format_cayley,
    from_cayley_table,
    group_from_spec,
    is_generating,
    is_subgroup,
    klein_four,
    parse_cayley_text,
    subgroup_generated,
    symmetric,
)

SMALL_GROUPS = {
    "Z1": cyclic(1),
    "Z2": cyclic(2),
    "Z3": cyclic(3),
    "Z4": cyclic(4),
    "V4": klein_four(),
    "S3": symmetric(3),
    "D4": dihedral(4),
    "Z2xZ3": direct_product(cyclic(2), cyclic(3)),
    "S4": symmetric(4),
}


def brute_axioms(g):
    d, T = g.order, g.table
    r = range(d)
    assert all(sorted(T[i]) == list(r) for i in r)
    assert all(sorted(T[:, j]) == list(r) for j in r)
    e = g.identity
    assert all(T[e, j] == j and T[j, e] == j for j in r)
    assert all(T[i, g.inv(i)] == e == T[g.inv(i), i] for i in r)
    assert all(T[T[i, j], k] == T[i, T[j, k]] for i in r for j in r for k in r)


def compose(s, t):
    """(s*t)(x) = s(t(x)), on tuples."""
    return tuple(s[t[x]] for x in range(len(t)))


class TestFromCayleyTable:
    def test_z2(self):
        g = from_cayley_table([0, 1], [[0, 1], [1, 0]])
        assert g.order == 2
        assert g.identity == 0
        assert g.inverse.tolist() == [0, 1]

    def test_duplicate_column_entry(self):
        with pytest.raises(NotLatinSquare, match="column 0"):
            from_cayley_table([0, 1], [[0, 1], [0, 1]])

    def test_s3_from_independent_composition(self):
        perms = list(itertools.permutations(range(3)))
        table = [[perms.index(compose(s, t)) for t in perms] for s in perms]
        g = from_cayley_table([str(p) for p in perms], table)
        assert g.order == 6
        assert np.array_equal(g.table, symmetric(3).table)

    def test_no_identity(self):
        # Latin square with no identity row/column
        with pytest.raises(NoIdentity):
            from_cayley_table("abc", [[0, 2, 1], [2, 1, 0], [1, 0, 2]])

    def test_non_associative(self):
        # Latin square with identity 0 that is not a group table (order 5 loop)
        t = [
            [0, 1, 2, 3, 4],
            [1, 0, 3, 4, 2],
            [2, 4, 0, 1, 3],
            [3, 2, 4, 0, 1],
            [4, 3, 1, 2, 0],
        ]
        with pytest.raises(NonAssociative):
            from_cayley_table("abcde", t)

    def test_missing_inverse(self):
        # identity 0; 1*2 = 0 but 2*1 != 0
        t = [
            [0, 1, 2, 3, 4],
            [1, 3, 0, 4, 2],
            [2, 4, 3, 0, 1],
            [3, 2, 4, 1, 0],
            [4, 0, 1, 2, 3],
        ]
        with pytest.raises(MissingInverse, match="element 1"):
            from_cayley_table("abcde", t)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            from_cayley_table([0, 1], [[0, 1], [1, 2]])

    def test_tables_are_read_only(self):
        g = cyclic(3)
        with pytest.raises(ValueError):
            g.table[0, 0] = 1


class TestConstructors:
    @pytest.mark.parametrize("name", sorted(SMALL_GROUPS))
    def test_axioms_brute_force(self, name):
        g = SMALL_GROUPS[name]
        if g.order <= 8:
            brute_axioms(g)

    def test_cyclic_examples(self):
        assert cyclic(1).order == 1
        assert cyclic(2).table.tolist() == [[0, 1], [1, 0]]
        assert cyclic(4).inverse.tolist() == [0, 3, 2, 1]
        with pytest.raises(ValueError):
            cyclic(0)

    @pytest.mark.parametrize("n", range(1, 13))
    def test_cyclic_abelian(self, n):
        assert cyclic(n).is_abelian()

    def test_symmetric_2_is_z2(self):
        assert np.array_equal(symmetric(2).table, cyclic(2).table)

    def test_symmetric_3_involutions(self):
        g = symmetric(3)
        selfinv = [i for i in range(6) if i != g.identity and g.inv(i) == i]
        assert len(selfinv) == 3

    def test_symmetric_4_nonabelian(self):
        g = symmetric(4)
        assert g.order == 24
        assert (g.table != g.table.T).any()

    def test_symmetric_range(self):
        for n in (0, 7):
            with pytest.raises(ValueError):
                symmetric(n)

    def test_symmetric_6_full_check(self):
        g = symmetric(6)
        assert g.order == MAX_ORDER

    def test_dihedral_3_matches_s3_orders(self):
        d3, s3 = dihedral(3), symmetric(3)
        o1 = sorted(d3.element_order(i) for i in range(6))
        o2 = sorted(s3.element_order(i) for i in range(6))
        assert o1 == o2 == [1, 2, 2, 2, 3, 3]

    def test_dihedral_rotations_subgroup(self):
        g = dihedral(4)
        assert is_subgroup(g, range(4))
        assert not g.is_abelian()

    def test_klein_all_self_inverse(self):
        g = klein_four()
        assert all(g.inv(i) == i for i in range(4))

    def test_z2_x_z3_has_order_six_element(self):
        g = direct_product(cyclic(2), cyclic(3))
        assert g.element_order(1 * 3 + 1) == 6

    def test_product_overflow(self):
        with pytest.raises(GroupTooLarge):
            direct_product(symmetric(5), cyclic(7))

    @given(st.integers(1, 6), st.integers(1, 6))
    def test_product_order(self, a, b):
        assert direct_product(cyclic(a), cyclic(b)).order == a * b


class TestSubgroups:
    def test_examples(self):
        z4 = cyclic(4)
        assert subgroup_generated(z4, {2}).indices == (0, 2)
        assert subgroup_generated(z4, {1}).indices == (0, 1, 2, 3)
        s3 = symmetric(3)
        # 132 is a transposition, 231 a 3-cycle
        assert len(subgroup_generated(s3, {s3.index("132"), s3.index("231")})) == 6

    def test_is_generating(self):
        assert not is_generating(cyclic(4), {2})
        assert all(is_generating(cyclic(5), {i}) for i in range(1, 5))
        s3 = symmetric(3)
        assert not is_generating(s3, {s3.index("231")})
        assert len(subgroup_generated(s3, {s3.index("231")})) == 3

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            subgroup_generated(cyclic(3), set())

    @settings(max_examples=60, deadline=None)
    @given(st.sampled_from(sorted(SMALL_GROUPS)), st.data())
    def test_closure_properties(self, name, data):
        g = SMALL_GROUPS[name]
        s = data.draw(st.sets(st.integers(0, g.order - 1), min_size=1))
        h = subgroup_generated(g, s)
        assert set(s) <= set(h)
        assert g.identity in h
        assert all(g.inv(x) in h for x in h)
        assert is_subgroup(g, h)
        assert subgroup_generated(g, h) == h

    def test_element_set_validation(self):
        with pytest.raises(ValueError):
            ElementSet(3, (0, 3))
        with pytest.raises(ValueError):
            ElementSet(3, (1, 1))
        assert ElementSet(4, (0, 2)).complement().indices == (1, 3)


class TestCayleyFiles:
    def test_roundtrip(self):
        g = dihedral(3)
        h = parse_cayley_text(format_cayley(g))
        assert h.labels == g.labels
        assert np.array_equal(h.table, g.table)

    @pytest.mark.parametrize(
        "text, line, column",
        [
            ("", 1, None),
            ("x\n", 1, 1),
            ("2\na\n0 1\n1 0\n", 2, None),
            ("2\na b\n0 1\n", 4, None),
            ("2\na b\n0 1\n1\n", 4, None),
            ("2\na b\n0 1\n1 q\n", 4, 2),
            ("2\na b\n0 1\n1 5\n", 4, 2),
        ],
    )
    def test_malformed(self, text, line, column):
        with pytest.raises(CayleyFormatError) as ei:
            parse_cayley_text(text)
        assert ei.value.line == line
        assert ei.value.column == column

    def test_axiom_failure_from_file(self):
        with pytest.raises(NotLatinSquare):
            parse_cayley_text("2\na b\n0 1\n0 1\n")

    def test_spec_strings(self, tmp_path):
        assert group_from_spec("cyclic:5").order == 5
        assert group_from_spec("klein").order == 4
        assert group_from_spec("product:cyclic:2*cyclic:3").order == 6
        p = tmp_path / "g.txt"
        p.write_text(format_cayley(symmetric(3)))
        assert group_from_spec(f"file:{p}").order == 6
        with pytest.raises(ValueError):
            group_from_spec("cyclic:0")
        with pytest.raises(ValueError):
            group_from_spec("nope:3")
