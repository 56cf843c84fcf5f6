"""Finite groups given by explicit multiplication tables.

Elements are dense indices ``0..d-1``; labels exist only for display and file
round-trips.  Every constructor funnels through :func:`from_cayley_table`, so
each group that exists has passed the full axiom check.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

#: Largest order accepted.  Associativity is checked exhaustively (O(d^3)).
MAX_ORDER = 720


class GroupAxiomError(ValueError):
    """A multiplication table violates a group axiom."""


class NotLatinSquare(GroupAxiomError):
    pass


class NoIdentity(GroupAxiomError):
    pass


class NonAssociative(GroupAxiomError):
    pass


class MissingInverse(GroupAxiomError):
    pass


class GroupTooLarge(ValueError):
    pass


class CayleyFormatError(ValueError):
    """Malformed Cayley-table file; carries 1-based line and column."""

    def __init__(self, message: str, line: int, column: int | None = None):
        where = f"line {line}" if column is None else f"line {line}, column {column}"
        super().__init__(f"{where}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    """A validated finite group.

    ``table[i, j]`` is the index of ``g_i * g_j``.  ``left_div[g, j]`` is the
    index of ``g^{-1} * g_j``, which is what the urn kernel needs in its inner
    loop.  Arrays are read-only; instances are safe to share between threads.
    """

    labels: tuple[str, ...]
    table: np.ndarray
    identity: int
    inverse: np.ndarray
    left_div: np.ndarray = field(repr=False)

    @property
    def order(self) -> int:
        return len(self.labels)

    @functools.cached_property
    def rows(self) -> tuple[tuple[int, ...], ...]:
        """The table as nested tuples, for pure-Python inner loops."""
        return tuple(tuple(r) for r in self.table.tolist())

    def mul(self, i: int, j: int) -> int:
        return int(self.table[i, j])

    def inv(self, i: int) -> int:
        return int(self.inverse[i])

    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.table, self.table.T))

    def element_order(self, i: int) -> int:
        k, x = 1, i
        while x != self.identity:
            x = int(self.table[x, i])
            k += 1
        return k

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"no element labeled {label!r}") from None

    def __repr__(self) -> str:
        return f"FiniteGroup(order={self.order}, identity={self.identity})"


def _check_axioms(table: np.ndarray) -> tuple[int, np.ndarray]:
    d = table.shape[0]
    want = np.arange(d)
    for i in range(d):
        if not np.array_equal(np.sort(table[i]), want):
            j = _first_repeat(table[i])
            raise NotLatinSquare(f"row {i} repeats entry at column {j}")
    for j in range(d):
        if not np.array_equal(np.sort(table[:, j]), want):
            i = _first_repeat(table[:, j])
            raise NotLatinSquare(f"column {j} repeats entry at row {i}")

    identity = None
    for e in range(d):
        if np.array_equal(table[e], want) and np.array_equal(table[:, e], want):
            identity = e
            break
    if identity is None:
        raise NoIdentity("no element acts as a two-sided identity")

    # Latin rows/columns give unique right and left inverses; they must agree.
    right = np.argmax(table == identity, axis=1)
    left = np.argmax(table == identity, axis=0)
    bad = np.nonzero(right != left)[0]
    if bad.size:
        i = int(bad[0])
        raise MissingInverse(
            f"element {i} has right inverse {int(right[i])} but left inverse {int(left[i])}"
        )

    # (g_i g_j) g_k == g_i (g_j g_k), one i-slab at a time to bound memory.
    for i in range(d):
        lhs = table[table[i]]
        rhs = table[i][table]
        if not np.array_equal(lhs, rhs):
            j, k = np.argwhere(lhs != rhs)[0]
            raise NonAssociative(f"(g{i} g{j}) g{k} != g{i} (g{j} g{k})")
    return identity, right


def _first_repeat(row: np.ndarray) -> int:
    seen = set()
    for pos, v in enumerate(row.tolist()):
        if v in seen:
            return pos
        seen.add(v)
    return len(row)


def from_cayley_table(labels: Sequence, table) -> FiniteGroup:
    """Validate a multiplication table and build a :class:`FiniteGroup`.

    Raises one of :class:`NotLatinSquare`, :class:`NoIdentity`,
    :class:`MissingInverse`, :class:`NonAssociative` naming the first offending
    indices, or :class:`GroupTooLarge` beyond :data:`MAX_ORDER`.
    """
    arr = np.asarray(table)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise ValueError(f"table must be a non-empty square array, got shape {arr.shape}")
    d = arr.shape[0]
    if d > MAX_ORDER:
        raise GroupTooLarge(f"order {d} exceeds MAX_ORDER={MAX_ORDER}")
    if len(labels) != d:
        raise ValueError(f"{len(labels)} labels for a table of order {d}")
    if not np.issubdtype(arr.dtype, np.integer):
        raise ValueError("table entries must be integers")
    if arr.min() < 0 or arr.max() >= d:
        i, j = np.argwhere((arr < 0) | (arr >= d))[0]
        raise ValueError(f"entry [{i}][{j}]={arr[i, j]} outside [0, {d})")
    arr = arr.astype(np.int64)

    identity, inverse = _check_axioms(arr)
    left_div = arr[inverse]  # left_div[g, j] = g^{-1} g_j
    for a in (arr, inverse, left_div):
        a.setflags(write=False)
    return FiniteGroup(tuple(str(x) for x in labels), arr, int(identity), inverse, left_div)


def cyclic(n: int) -> FiniteGroup:
    if n < 1:
        raise ValueError(f"cyclic group needs n >= 1, got {n}")
    idx = np.arange(n)
    return from_cayley_table([str(i) for i in range(n)], (idx[:, None] + idx[None, :]) % n)


def symmetric(n: int) -> FiniteGroup:
    """Symmetric group on ``n`` symbols.

    Elements are permutations in lexicographic one-line order; the product
    ``sigma * tau`` applies ``tau`` first, i.e. ``(sigma*tau)(x) = sigma(tau(x))``.
    """
    if not 1 <= n <= 6:
        raise ValueError(f"symmetric(n) supports 1 <= n <= 6, got {n}")
    perms = list(itertools.permutations(range(n)))
    pos = {p: k for k, p in enumerate(perms)}
    table = [[pos[tuple(s[t[x]] for x in range(n))] for t in perms] for s in perms]
    labels = ["".join(str(x + 1) for x in p) for p in perms]
    return from_cayley_table(labels, table)


def dihedral(n: int) -> FiniteGroup:
    """Dihedral group of order ``2n``.

    Index ``k`` is the rotation ``r^k`` and index ``n + k`` the reflection
    ``s r^k``; so the rotation subgroup is ``{0, ..., n-1}``.
    """
    if n < 1:
        raise ValueError(f"dihedral group needs n >= 1, got {n}")
    if 2 * n > MAX_ORDER:
        raise GroupTooLarge(f"order {2 * n} exceeds MAX_ORDER={MAX_ORDER}")
    d = 2 * n
    table = np.empty((d, d), dtype=np.int64)
    for a in range(d):
        f1, k1 = divmod(a, n)
        for b in range(d):
            f2, k2 = divmod(b, n)
            # s^f1 r^k1 s^f2 r^k2 = s^(f1+f2) r^((-1)^f2 k1 + k2)
            k = ((-k1 if f2 else k1) + k2) % n
            table[a, b] = ((f1 + f2) % 2) * n + k
    labels = [f"r{k}" for k in range(n)] + [f"sr{k}" for k in range(n)]
    return from_cayley_table(labels, table)


def direct_product(g1: FiniteGroup, g2: FiniteGroup) -> FiniteGroup:
    """Componentwise product; index ``i1 * |G2| + i2`` is the pair ``(i1, i2)``."""
    d1, d2 = g1.order, g2.order
    if d1 * d2 > MAX_ORDER:
        raise GroupTooLarge(f"order {d1 * d2} exceeds MAX_ORDER={MAX_ORDER}")
    t1 = np.repeat(np.repeat(g1.table, d2, axis=0), d2, axis=1)
    t2 = np.tile(g2.table, (d1, d1))
    labels = [f"({a},{b})" for a in g1.labels for b in g2.labels]
    return from_cayley_table(labels, t1 * d2 + t2)


def klein_four() -> FiniteGroup:
    return direct_product(cyclic(2), cyclic(2))


@dataclass(frozen=True)
class ElementSet:
    """A set of element indices of a group of order ``d``."""

    d: int
    indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(sorted(int(i) for i in self.indices))
        if len(set(idx)) != len(idx):
            raise ValueError("duplicate element indices")
        if idx and (idx[0] < 0 or idx[-1] >= self.d):
            raise ValueError(f"element index out of range [0, {self.d})")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def of(cls, group: FiniteGroup, indices: Iterable[int]) -> "ElementSet":
        return cls(group.order, tuple(set(int(i) for i in indices)))

    def __contains__(self, i) -> bool:
        return int(i) in self.indices

    def __iter__(self):
        return iter(self.indices)

    def __len__(self) -> int:
        return len(self.indices)

    def complement(self) -> "ElementSet":
        return ElementSet(self.d, tuple(i for i in range(self.d) if i not in self.indices))

    def mask(self) -> np.ndarray:
        m = np.zeros(self.d, dtype=bool)
        m[list(self.indices)] = True
        return m


def _as_set(group: FiniteGroup, s) -> ElementSet:
    if isinstance(s, ElementSet):
        if s.d != group.order:
            raise ValueError(f"element set belongs to a group of order {s.d}, not {group.order}")
        return s
    return ElementSet.of(group, s)


def subgroup_generated(group: FiniteGroup, s) -> ElementSet:
    """Closure of ``S`` under multiplication: the subgroup generated by ``S``."""
    s = _as_set(group, s)
    if not len(s):
        raise ValueError("generating set must be nonempty")
    gens = list(s)
    seen = {group.identity}
    frontier = [group.identity]
    table = group.table
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = int(table[x, g])
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return ElementSet(group.order, tuple(seen))


def is_generating(group: FiniteGroup, s) -> bool:
    return len(subgroup_generated(group, s)) == group.order


def is_subgroup(group: FiniteGroup, h) -> bool:
    h = _as_set(group, h)
    if group.identity not in h:
        return False
    members = h.mask()
    sub = group.table[np.ix_(list(h), list(h))]
    return bool(members[sub].all())


# ---------------------------------------------------------------------------
# Cayley-table text files


def parse_cayley_text(text: str) -> FiniteGroup:
    """Parse the plain-text table format.

    Line 1 holds ``d``, line 2 the ``d`` labels, then ``d`` rows of ``d``
    whitespace-separated indices.  Blank trailing lines are ignored.
    """
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise CayleyFormatError("empty file", 1)
    try:
        d = int(lines[0].strip())
    except ValueError:
        raise CayleyFormatError(f"order must be an integer, got {lines[0].strip()!r}", 1, 1) from None
    if d < 1:
        raise CayleyFormatError(f"order must be positive, got {d}", 1, 1)
    if len(lines) < 2:
        raise CayleyFormatError("missing label line", 2)
    labels = lines[1].split()
    if len(labels) != d:
        raise CayleyFormatError(f"expected {d} labels, found {len(labels)}", 2)
    if len(lines) != d + 2:
        raise CayleyFormatError(f"expected {d} table rows, found {len(lines) - 2}", min(len(lines), d + 2) + 1)
    table = []
    for r in range(d):
        lineno = r + 3
        toks = lines[r + 2].split()
        if len(toks) != d:
            raise CayleyFormatError(f"expected {d} entries, found {len(toks)}", lineno)
        row = []
        for c, tok in enumerate(toks):
            try:
                v = int(tok)
            except ValueError:
                raise CayleyFormatError(f"non-integer entry {tok!r}", lineno, c + 1) from None
            if not 0 <= v < d:
                raise CayleyFormatError(f"entry {v} outside [0, {d})", lineno, c + 1)
            row.append(v)
        table.append(row)
    return from_cayley_table(labels, table)


def load_cayley(path) -> FiniteGroup:
    return parse_cayley_text(Path(path).read_text())


def format_cayley(group: FiniteGroup) -> str:
    rows = [" ".join(str(v) for v in row) for row in group.table.tolist()]
    return "\n".join([str(group.order), " ".join(group.labels), *rows]) + "\n"


_CONSTRUCTORS = {
    "cyclic": cyclic,
    "symmetric": symmetric,
    "dihedral": dihedral,
}


def group_from_spec(spec: str) -> FiniteGroup:
    """Build a group from a short spec string.

    Accepted forms: ``cyclic:n``, ``symmetric:n``, ``dihedral:n``, ``klein``,
    ``product:A*B`` (e.g. ``product:cyclic:2*cyclic:3``) and ``file:PATH``.
    """
    spec = spec.strip()
    if spec == "klein":
        return klein_four()
    if spec.startswith("file:"):
        return load_cayley(spec[5:])
    if spec.startswith("product:"):
        parts = spec[8:].split("*")
        if len(parts) < 2:
            raise ValueError(f"product spec needs at least two factors: {spec!r}")
        g = group_from_spec(parts[0])
        for p in parts[1:]:
            g = direct_product(g, group_from_spec(p))
        return g
    name, sep, arg = spec.partition(":")
    if name not in _CONSTRUCTORS or not sep:
        raise ValueError(f"unknown group spec {spec!r}")
    try:
        n = int(arg)
    except ValueError:
        raise ValueError(f"group parameter must be an integer in {spec!r}") from None
    return _CONSTRUCTORS[name](n)
