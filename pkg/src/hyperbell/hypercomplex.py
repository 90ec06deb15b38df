"""Arithmetic in the real composition algebras (dimensions 1, 2, 4 and 8).

Values are real coefficient vectors ``x_0 + x_1 i_1 + ... + x_{d-1} i_{d-1}``
and products are driven by a :class:`StructureTable`, the signed
multiplication table of the basis units.  Two octonion conventions ship:
``TABLE1`` (the standard Fano-plane table with cycles such as
``i1 i2 = i4``) and ``DEGEN`` (the convention implied by Degen's
eight-square identity, where ``i1 i2 = -i3``).  ``DEGEN`` is the default
for dimension 8.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

from .errors import DomainError

ALGEBRA_DIMS = (1, 2, 4, 8)


class SignedUnit(NamedTuple):
    """``sign * i_index``; index 0 is the real unit."""

    sign: int
    index: int

    def __str__(self):
        return f"{'+' if self.sign > 0 else '-'}{self.index}"


def _check_dim(dim):
    if dim not in ALGEBRA_DIMS:
        raise DomainError(f"algebra dimension must be one of {ALGEBRA_DIMS}, got {dim}")


@dataclass(frozen=True, eq=False)
class StructureTable:
    """Signed multiplication table ``(p, q) -> sign * i_index``.

    ``signs`` and ``indices`` are ``dim x dim`` integer arrays.  The unit
    invariants (real unit is the identity, imaginary units square to -1,
    distinct imaginary units anticommute) are checked on construction.
    """

    name: str
    signs: np.ndarray
    indices: np.ndarray
    dim: int = field(init=False)

    def __post_init__(self):
        signs = np.array(self.signs, dtype=np.int8)
        indices = np.array(self.indices, dtype=np.int64)
        if signs.ndim != 2 or signs.shape[0] != signs.shape[1] or signs.shape != indices.shape:
            raise DomainError("structure table must be a square array of signed units")
        dim = signs.shape[0]
        _check_dim(dim)
        signs.setflags(write=False)
        indices.setflags(write=False)
        object.__setattr__(self, "signs", signs)
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "dim", dim)
        self._validate()

    def _validate(self):
        d, s, ix = self.dim, self.signs, self.indices
        if not np.all(np.abs(s) == 1):
            raise DomainError(f"{self.name}: signs must be +1 or -1")
        if ix.min() < 0 or ix.max() >= d:
            raise DomainError(f"{self.name}: unit index out of range")
        ar = np.arange(d)
        if not (np.all(s[0] == 1) and np.all(ix[0] == ar) and np.all(s[:, 0] == 1) and np.all(ix[:, 0] == ar)):
            raise DomainError(f"{self.name}: real unit must act as the identity")
        for p in range(1, d):
            if s[p, p] != -1 or ix[p, p] != 0:
                raise DomainError(f"{self.name}: i_{p}^2 must equal -1")
            for q in range(p + 1, d):
                if ix[p, q] != ix[q, p] or s[p, q] != -s[q, p]:
                    raise DomainError(f"{self.name}: i_{p} and i_{q} must anticommute")
                if ix[p, q] in (0, p, q):
                    raise DomainError(f"{self.name}: i_{p} i_{q} must be a third imaginary unit")

    def unit_mul(self, p: int, q: int) -> SignedUnit:
        if not (0 <= p < self.dim and 0 <= q < self.dim):
            raise DomainError(f"unit indices ({p}, {q}) outside algebra of dimension {self.dim}")
        return SignedUnit(int(self.signs[p, q]), int(self.indices[p, q]))

    @property
    def tensor(self) -> np.ndarray:
        """Dense structure constants ``M[p, q, s]`` with ``(e_p e_q)_s = M[p, q, s]``."""
        try:
            return self.__dict__["_tensor"]
        except KeyError:
            d = self.dim
            m = np.zeros((d, d, d))
            p, q = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
            m[p, q, self.indices] = self.signs
            m.setflags(write=False)
            self.__dict__["_tensor"] = m
            return m

    def restrict(self, units: Iterable[int], name: str | None = None) -> StructureTable:
        """Sub-table on the given units, renumbered in the order given.

        The units must close under multiplication (up to sign) and start
        with the real unit.
        """
        units = list(units)
        pos = {u: k for k, u in enumerate(units)}
        if units[:1] != [0]:
            raise DomainError("restriction must start with the real unit 0")
        n = len(units)
        signs = np.empty((n, n), dtype=np.int8)
        indices = np.empty((n, n), dtype=np.int64)
        for a, p in enumerate(units):
            for b, q in enumerate(units):
                su = self.unit_mul(p, q)
                if su.index not in pos:
                    raise DomainError(f"units {units} are not closed: i_{p} i_{q} = {su}")
                signs[a, b] = su.sign
                indices[a, b] = pos[su.index]
        return StructureTable(name or f"{self.name}{units}", signs, indices)

    def to_text(self) -> str:
        return format_table(self)

    def checksum(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()[:16]

    def __eq__(self, other):
        if not isinstance(other, StructureTable):
            return NotImplemented
        return (
            self.dim == other.dim
            and np.array_equal(self.signs, other.signs)
            and np.array_equal(self.indices, other.indices)
        )

    def __hash__(self):
        return hash((self.dim, self.signs.tobytes(), self.indices.tobytes()))

    def __repr__(self):
        return f"StructureTable({self.name!r}, dim={self.dim})"


def format_table(table: StructureTable) -> str:
    """Row-major text form: one row per line, entries like ``+4`` or ``-0``."""
    rows = []
    for p in range(table.dim):
        rows.append(" ".join(str(table.unit_mul(p, q)) for q in range(table.dim)))
    return "\n".join(rows) + "\n"


def parse_table(text: str, name: str = "custom") -> StructureTable:
    rows = [line.split() for line in text.strip().splitlines() if line.strip() and not line.lstrip().startswith("#")]
    signs, indices = [], []
    for r, row in enumerate(rows):
        if len(row) != len(rows):
            raise DomainError(f"table row {r} has {len(row)} entries, expected {len(rows)}")
        srow, irow = [], []
        for tok in row:
            if len(tok) < 2 or tok[0] not in "+-" or not tok[1:].isdigit():
                raise DomainError(f"bad table entry {tok!r} in row {r}")
            srow.append(1 if tok[0] == "+" else -1)
            irow.append(int(tok[1:]))
        signs.append(srow)
        indices.append(irow)
    return StructureTable(name, np.array(signs), np.array(indices))


TABLE1 = parse_table(
    """
    +0 +1 +2 +3 +4 +5 +6 +7
    +1 -0 +4 +7 -2 +6 -5 -3
    +2 -4 -0 +5 +1 -3 +7 -6
    +3 -7 -5 -0 +6 +2 -4 +1
    +4 +2 -1 -6 -0 +7 +3 -5
    +5 -6 +3 -2 -7 -0 +1 +4
    +6 +5 -7 +4 -3 -1 -0 +2
    +7 +3 +6 -1 +5 -4 -2 -0
    """,
    name="table1",
)

# Read off Degen's eight-square identity: the monomial +-u_1 v_2 in the
# s-th square fixes e_u e_v = +-e_s.
DEGEN = parse_table(
    """
    +0 +1 +2 +3 +4 +5 +6 +7
    +1 -0 -3 +2 -5 +4 +7 -6
    +2 +3 -0 -1 -6 -7 +4 +5
    +3 -2 +1 -0 -7 +6 -5 +4
    +4 +5 +6 +7 -0 -1 -2 -3
    +5 -4 +7 -6 +1 -0 +3 -2
    +6 -7 -4 +5 +2 -3 -0 +1
    +7 +6 -5 -4 +3 +2 -1 -0
    """,
    name="degen",
)

# i j = k, j k = i, k i = j
QUATERNION = parse_table(
    """
    +0 +1 +2 +3
    +1 -0 +3 -2
    +2 -3 -0 +1
    +3 +2 -1 -0
    """,
    name="quaternion",
)

COMPLEX = parse_table("+0 +1\n+1 -0", name="complex")
REAL = parse_table("+0", name="real")

CONVENTIONS = {t.name: t for t in (REAL, COMPLEX, QUATERNION, TABLE1, DEGEN)}
DEFAULT_CONVENTION = {1: "real", 2: "complex", 4: "quaternion", 8: "degen"}


def get_table(dim: int, convention: str | None = None) -> StructureTable:
    """Look up a built-in table by dimension and optional convention name."""
    _check_dim(dim)
    name = convention or DEFAULT_CONVENTION[dim]
    try:
        table = CONVENTIONS[name]
    except KeyError:
        raise DomainError(f"unknown convention {name!r}; choose from {sorted(CONVENTIONS)}") from None
    if table.dim != dim:
        raise DomainError(f"convention {name!r} has dimension {table.dim}, not {dim}")
    return table


class Hypercomplex:
    """An immutable element of a composition algebra, stored as real coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        c = np.array(coeffs, dtype=float).reshape(-1)
        _check_dim(c.size)
        if not np.all(np.isfinite(c)):
            raise DomainError("hypercomplex coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def __setattr__(self, key, value):
        raise AttributeError("Hypercomplex values are immutable")

    @classmethod
    def unit(cls, dim: int, index: int = 0) -> Hypercomplex:
        _check_dim(dim)
        if not 0 <= index < dim:
            raise DomainError(f"unit index {index} outside algebra of dimension {dim}")
        c = np.zeros(dim)
        c[index] = 1.0
        return cls(c)

    @classmethod
    def zero(cls, dim: int) -> Hypercomplex:
        return cls(np.zeros(dim))

    @property
    def dim(self) -> int:
        return self.coeffs.size

    @property
    def real(self) -> float:
        return float(self.coeffs[0])

    def __add__(self, other):
        _same_dim(self, other)
        return Hypercomplex(self.coeffs + other.coeffs)

    def __sub__(self, other):
        _same_dim(self, other)
        return Hypercomplex(self.coeffs - other.coeffs)

    def __neg__(self):
        return Hypercomplex(-self.coeffs)

    def __mul__(self, other):
        if isinstance(other, Hypercomplex):
            return hc_mul(self, other)
        if np.isscalar(other):
            return Hypercomplex(self.coeffs * float(other))
        return NotImplemented

    def __rmul__(self, other):
        if np.isscalar(other):
            return Hypercomplex(self.coeffs * float(other))
        return NotImplemented

    def __abs__(self):
        return hc_norm(self)

    def __eq__(self, other):
        if not isinstance(other, Hypercomplex):
            return NotImplemented
        return self.dim == other.dim and np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self):
        return hash(self.coeffs.tobytes())

    def allclose(self, other, rtol=1e-12, atol=1e-12) -> bool:
        return self.dim == other.dim and np.allclose(self.coeffs, other.coeffs, rtol=rtol, atol=atol)

    def __repr__(self):
        return f"Hypercomplex({self.coeffs.tolist()})"


def _same_dim(*xs):
    dims = {x.dim for x in xs}
    if len(dims) != 1:
        raise DomainError(f"dimension mismatch: {sorted(dims)}")


def _resolve(table, dim):
    if table is None:
        return get_table(dim)
    if table.dim != dim:
        raise DomainError(f"table {table.name!r} has dimension {table.dim}, operands have {dim}")
    return table


def unit_mul(table: StructureTable, p: int, q: int) -> SignedUnit:
    return table.unit_mul(p, q)


def hc_mul(x: Hypercomplex, y: Hypercomplex, table: StructureTable | None = None) -> Hypercomplex:
    """Bilinear product ``z_s = sum sign(p,q) x_p y_q`` over ``e_p e_q = +-e_s``."""
    _same_dim(x, y)
    table = _resolve(table, x.dim)
    return Hypercomplex(np.einsum("p,q,pqs->s", x.coeffs, y.coeffs, table.tensor))


def hc_conj(x: Hypercomplex) -> Hypercomplex:
    c = -x.coeffs
    c[0] = x.coeffs[0]
    return Hypercomplex(c)


def hc_norm(x: Hypercomplex) -> float:
    # hypot rescales internally, so tiny or huge coefficients do not under/overflow
    return math.hypot(*x.coeffs)


def associator(a: Hypercomplex, b: Hypercomplex, c: Hypercomplex, table: StructureTable | None = None) -> Hypercomplex:
    """``(ab)c - a(bc)``."""
    _same_dim(a, b, c)
    table = _resolve(table, a.dim)
    return hc_mul(hc_mul(a, b, table), c, table) - hc_mul(a, hc_mul(b, c, table), table)


def square_identity_check(dim: int, v1, v2, table: StructureTable | None = None) -> tuple[float, float]:
    """Both sides of the ``dim``-square identity for the pair ``(v1, v2)``.

    Returns ``(sum of squared product components, |v1|^2 |v2|^2)``.
    """
    _check_dim(dim)
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    if v1.shape != (dim,) or v2.shape != (dim,):
        raise DomainError(f"square identity of order {dim} needs two vectors of length {dim}")
    z = hc_mul(Hypercomplex(v1), Hypercomplex(v2), _resolve(table, dim)).coeffs
    return float(np.dot(z, z)), float(np.dot(v1, v1) * np.dot(v2, v2))


def composition_defect(table: StructureTable, trials: int = 1000, seed: int = 0) -> float:
    """Largest relative deviation ``| |xy| - |x||y| | / (|x||y|)`` over random pairs."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        x, y = rng.standard_normal((2, table.dim))
        z = hc_mul(Hypercomplex(x), Hypercomplex(y), table)
        ref = np.linalg.norm(x) * np.linalg.norm(y)
        worst = max(worst, abs(hc_norm(z) - ref) / ref)
    return worst


def identity_defect(table: StructureTable, trials: int = 1000, seed: int = 0) -> float:
    """Largest relative gap between the two sides of the square identity."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        v1, v2 = rng.standard_normal((2, table.dim))
        lhs, rhs = square_identity_check(table.dim, v1, v2, table)
        worst = max(worst, abs(lhs - rhs) / rhs)
    return worst
