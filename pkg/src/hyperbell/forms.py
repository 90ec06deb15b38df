"""Groupings of n-fold products and their expansion into signed multilinear forms.

A grouped product ``(q_1 q_2) q_3`` of hypercomplex numbers, one per site,
expands into ``dim`` real multilinear forms ``X_s`` of the site
coefficients.  Each choice of one component per site ``(l_1, ..., l_n)``
contributes a single signed monomial to exactly one ``X_s``; the
:class:`CoefficientTensor` records that assignment.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from math import factorial
from typing import Iterator, Union

import numpy as np

from .errors import DomainError
from .hypercomplex import Hypercomplex, SignedUnit, StructureTable, hc_mul

LETTERS = "ABCDEFGH"

Tree = Union[int, tuple]


def catalan(n: int) -> int:
    """Number of groupings of an n-fold product, ``(2n-2)! / (n! (n-1)!)``."""
    if n < 1:
        raise DomainError("a product needs at least one factor")
    return factorial(2 * n - 2) // (factorial(n) * factorial(n - 1))


@dataclass(frozen=True)
class Grouping:
    """Full binary tree over sites ``1..n``; leaves are site numbers, in order."""

    tree: Tree

    def __post_init__(self):
        leaves = list(_leaves(self.tree))
        if leaves != list(range(1, len(leaves) + 1)):
            raise DomainError(f"grouping leaves must read 1..n left to right, got {leaves}")

    @property
    def n(self) -> int:
        return sum(1 for _ in _leaves(self.tree))

    def __str__(self):
        return _render(self.tree)

    @classmethod
    def left(cls, n: int) -> Grouping:
        """``((1 2) 3) ...`` left-nested grouping."""
        if n < 1:
            raise DomainError("a product needs at least one factor")
        tree: Tree = 1
        for k in range(2, n + 1):
            tree = (tree, k)
        return cls(tree)


def _leaves(tree: Tree) -> Iterator[int]:
    if isinstance(tree, tuple):
        if len(tree) != 2:
            raise DomainError("every internal grouping node needs exactly two children")
        yield from _leaves(tree[0])
        yield from _leaves(tree[1])
    else:
        yield tree


def _render(tree: Tree) -> str:
    if isinstance(tree, tuple):
        return f"({_render(tree[0])} {_render(tree[1])})"
    return str(tree)


_TOKEN = re.compile(r"\s*(\(|\)|\d+)")


def parse_grouping(text: str, n: int | None = None) -> Grouping:
    """Parse ``"((1 2) 3)"``; optionally require ``n`` leaves."""
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise DomainError(f"bad grouping string {text!r} at position {pos}")
        tokens.append(m.group(1))
        pos = m.end()

    def parse(i):
        if i >= len(tokens):
            raise DomainError(f"grouping string {text!r} ends early")
        tok = tokens[i]
        if tok == "(":
            left, i = parse(i + 1)
            right, i = parse(i)
            if i >= len(tokens):
                raise DomainError(f"grouping string {text!r} ends early")
            if tokens[i] != ")":
                raise DomainError(f"grouping string {text!r}: expected ')' (binary nodes only)")
            return (left, right), i + 1
        if tok == ")":
            raise DomainError(f"grouping string {text!r}: unexpected ')'")
        return int(tok), i + 1

    tree, end = parse(0)
    if end != len(tokens):
        raise DomainError(f"grouping string {text!r} has trailing tokens")
    grouping = Grouping(tree)
    if n is not None and grouping.n != n:
        raise DomainError(f"grouping leaf count {grouping.n} ≠ {n}")
    return grouping


@lru_cache(maxsize=None)
def _trees(lo: int, hi: int) -> tuple:
    if lo == hi:
        return (lo,)
    out = []
    for split in range(lo, hi):
        for left in _trees(lo, split):
            for right in _trees(split + 1, hi):
                out.append((left, right))
    return tuple(out)


def enumerate_groupings(n: int) -> list[Grouping]:
    """All groupings of n ordered factors, ordered by the top-level split point."""
    if n < 1:
        raise DomainError("a product needs at least one factor")
    return [Grouping(t) for t in _trees(1, n)]


def grouped_unit_product(table: StructureTable, units, grouping: Grouping) -> SignedUnit:
    units = list(units)
    if len(units) != grouping.n:
        raise DomainError(f"{len(units)} units for a grouping with {grouping.n} leaves")

    def walk(tree):
        if isinstance(tree, tuple):
            a, b = walk(tree[0]), walk(tree[1])
            su = table.unit_mul(a.index, b.index)
            return SignedUnit(a.sign * b.sign * su.sign, su.index)
        return table.unit_mul(0, units[tree - 1])

    return walk(grouping.tree)


def grouped_product(values, grouping: Grouping, table: StructureTable | None = None) -> Hypercomplex:
    """Multiply one hypercomplex value per site following ``grouping``."""
    values = list(values)
    if len(values) != grouping.n:
        raise DomainError(f"{len(values)} factors for a grouping with {grouping.n} leaves")

    def walk(tree):
        if isinstance(tree, tuple):
            return hc_mul(walk(tree[0]), walk(tree[1]), table)
        return values[tree - 1]

    return walk(grouping.tree)


@dataclass(frozen=True, eq=False)
class CoefficientTensor:
    """Signed unit for every component tuple ``(l_1, ..., l_n)`` of a grouped product.

    ``signs[l_1, ..., l_n]`` and ``indices[l_1, ..., l_n]`` give the signed
    unit ``e_{l_1} ... e_{l_n}`` (with the grouping applied).
    """

    table: StructureTable
    grouping: Grouping
    signs: np.ndarray
    indices: np.ndarray

    @property
    def dim(self) -> int:
        return self.table.dim

    @property
    def n(self) -> int:
        return self.grouping.n

    def entry(self, *tup: int) -> SignedUnit:
        return SignedUnit(int(self.signs[tup]), int(self.indices[tup]))

    def dense(self) -> np.ndarray:
        """Real array ``C[l_1, ..., l_n, s]`` equal to +-1 where the tuple feeds ``X_s``."""
        out = np.zeros(self.signs.shape + (self.dim,))
        flat_idx = self.indices.reshape(-1)
        out.reshape(-1, self.dim)[np.arange(flat_idx.size), flat_idx] = self.signs.reshape(-1)
        return out

    def evaluate(self, vectors) -> np.ndarray:
        """Values of all forms ``X_s`` at one real coefficient vector per site."""
        vectors = [np.asarray(v, dtype=float) for v in vectors]
        if len(vectors) != self.n or any(v.shape != (self.dim,) for v in vectors):
            raise DomainError(f"need {self.n} vectors of length {self.dim}")
        acc = self.dense()
        for v in vectors:
            acc = np.tensordot(v, acc, axes=(0, 0))
        return acc

    def monomials(self, s: int) -> list[tuple[int, tuple[int, ...]]]:
        """``(sign, (l_1, ..., l_n))`` pairs of the form ``X_s``, in lexicographic tuple order."""
        hits = np.argwhere(self.indices == s)
        return [(int(self.signs[tuple(t)]), tuple(int(x) for x in t)) for t in hits]

    def render_form(self, s: int) -> str:
        """``X_s`` with letters per component and site numbers, e.g. ``A1 A2 - B1 B2``."""
        parts = []
        for sign, tup in self.monomials(s):
            term = " ".join(f"{LETTERS[l]}{m + 1}" for m, l in enumerate(tup))
            parts.append(("- " if sign < 0 else "+ ") + term)
        text = " ".join(parts)
        return text[2:] if text.startswith("+ ") else "-" + text[2:]

    def to_text(self) -> str:
        """One line per tuple, ``l_1 ... l_n -> +-s``, followed by the rendered forms."""
        lines = [f"# table={self.table.name} dim={self.dim} n={self.n} grouping={self.grouping}"]
        for tup in np.ndindex(*self.signs.shape):
            lines.append(" ".join(str(l) for l in tup) + " -> " + str(self.entry(*tup)))
        lines.append("# forms")
        for s in range(self.dim):
            lines.append(f"X{s} = {self.render_form(s)}")
        return "\n".join(lines) + "\n"

    def same_entries(self, other: CoefficientTensor) -> bool:
        return np.array_equal(self.signs, other.signs) and np.array_equal(self.indices, other.indices)


def build_forms(table: StructureTable, n: int, grouping: Grouping | None = None) -> CoefficientTensor:
    """Expand the grouped product of ``n`` generic hypercomplex numbers."""
    if n < 1:
        raise DomainError("a product needs at least one factor")
    grouping = grouping if grouping is not None else Grouping.left(n)
    if grouping.n != n:
        raise DomainError(f"grouping leaf count {grouping.n} ≠ {n}")
    d = table.dim
    tsign = table.signs.astype(np.int8)
    tidx = table.indices

    def walk(tree):
        # arrays over the axes of the leaves below this node
        if isinstance(tree, tuple):
            ls, li = walk(tree[0])
            rs, ri = walk(tree[1])
            lsh, rsh = ls.shape, rs.shape
            lfi = li.reshape(lsh + (1,) * len(rsh))
            rfi = ri.reshape((1,) * len(lsh) + rsh)
            sign = ls.reshape(lfi.shape) * rs.reshape(rfi.shape) * tsign[lfi, rfi]
            return sign.astype(np.int8), tidx[lfi, rfi]
        return np.ones(d, dtype=np.int8), np.arange(d)

    signs, indices = walk(grouping.tree)
    signs.setflags(write=False)
    indices.setflags(write=False)
    return CoefficientTensor(table, grouping, signs, indices)
