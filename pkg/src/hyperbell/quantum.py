"""Finite-dimensional states and observables.

Matrices are plain complex ``numpy`` arrays.  Constructors in this module
validate and freeze them (read-only copies), so values handed out are safe
to share between threads.  Every sampler takes an explicit integer seed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from .errors import DomainError
from .hypercomplex import ALGEBRA_DIMS, Hypercomplex

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
IMAG_TOL = 1e-10
MAX_GLOBAL_DIM = 4096

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
for _m in (PAULI_I, PAULI_X, PAULI_Y, PAULI_Z):
    _m.setflags(write=False)


def _frozen(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def as_matrix(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise DomainError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DomainError("matrix entries must be finite")
    return m


def hermitian(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate ``m`` as Hermitian and return its symmetrized, read-only copy."""
    m = as_matrix(m)
    gap = np.max(np.abs(m - m.conj().T))
    if gap > tol:
        raise DomainError(f"matrix is not Hermitian (max |H - H^dagger| = {gap:.3g})")
    return _frozen((m + m.conj().T) / 2)


def tensor_product(factors: Sequence[np.ndarray]) -> np.ndarray:
    """Kronecker product of the factors in site order."""
    factors = list(factors)
    if not factors:
        raise DomainError("tensor product of an empty list")
    return reduce(np.kron, (as_matrix(f) for f in factors))


@dataclass(frozen=True, eq=False)
class QuantumState:
    """A pure state vector or a density matrix."""

    kind: str
    data: np.ndarray

    @classmethod
    def pure(cls, psi, tol: float = 1e-10) -> QuantumState:
        psi = np.asarray(psi, dtype=complex).reshape(-1)
        norm = np.linalg.norm(psi)
        if psi.size < 1 or abs(norm - 1) > tol:
            raise DomainError(f"pure state must have unit norm, got {norm:.12g}")
        return cls("pure", _frozen(psi / norm))

    @classmethod
    def density(cls, rho) -> QuantumState:
        rho = hermitian(rho)
        tr = np.trace(rho).real
        if abs(tr - 1) > TRACE_TOL:
            raise DomainError(f"density matrix must have trace 1 (trace invariant), got trace {tr:.12g}")
        lo = np.linalg.eigvalsh(rho).min()
        if lo < -PSD_TOL:
            raise DomainError(f"density matrix must be positive semidefinite, min eigenvalue {lo:.3g}")
        return cls("density", rho)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def density_matrix(self) -> np.ndarray:
        if self.kind == "pure":
            return np.outer(self.data, self.data.conj())
        return self.data


@dataclass(frozen=True, eq=False)
class SiteObservables:
    """The Hermitian operators attached to one site, one per algebra component."""

    operators: tuple

    def __post_init__(self):
        ops = tuple(hermitian(o) for o in self.operators)
        if len(ops) not in ALGEBRA_DIMS:
            raise DomainError(f"a site needs 1, 2, 4 or 8 observables, got {len(ops)}")
        if len({o.shape for o in ops}) != 1:
            raise DomainError("all observables on a site must share one dimension")
        object.__setattr__(self, "operators", ops)

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    @property
    def K(self) -> int:
        return len(self.operators)

    def stacked(self) -> np.ndarray:
        return np.stack(self.operators)

    def padded(self, K: int, signs: Sequence[float] | None = None) -> SiteObservables:
        """Extend to ``K`` operators with zeros, optionally scaling the existing ones by ``signs``."""
        if K < self.K:
            raise DomainError("padding cannot shrink a site")
        signs = signs if signs is not None else [1.0] * self.K
        zero = np.zeros((self.dim, self.dim), dtype=complex)
        return SiteObservables(tuple(s * o for s, o in zip(signs, self.operators)) + (zero,) * (K - self.K))


@dataclass(frozen=True, eq=False)
class SeparableEnsemble:
    """Convex mixture ``sum_j p_j rho_j^(1) x ... x rho_j^(n)``."""

    weights: np.ndarray
    factors: tuple

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.ndim != 1 or w.size != len(self.factors) or w.size == 0:
            raise DomainError("need one weight per product term")
        if np.any(w < 0) or abs(w.sum() - 1) > TRACE_TOL:
            raise DomainError("weights must form a probability distribution")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "factors", tuple(tuple(_frozen(r) for r in term) for term in self.factors))

    def density_matrix(self) -> np.ndarray:
        return sum(p * tensor_product(term) for p, term in zip(self.weights, self.factors))


def expectation(op, state: QuantumState) -> float:
    """``Re tr(rho op)``; a large imaginary residue means ``op`` was not Hermitian."""
    op = np.asarray(op)
    if op.shape != (state.dim, state.dim):
        raise DomainError(f"operator of shape {op.shape} on a state of dimension {state.dim}")
    if state.kind == "pure":
        val = np.vdot(state.data, op @ state.data)
    else:
        val = np.einsum("ij,ji->", state.data, op)
    if abs(val.imag) > IMAG_TOL * max(1.0, abs(val.real)):
        raise DomainError(f"expectation has imaginary part {val.imag:.3g}; operator not Hermitian")
    return float(val.real)


def expectations(ops: np.ndarray, state: QuantumState) -> np.ndarray:
    """Vectorized :func:`expectation` over a stack of operators ``(k, d, d)``."""
    ops = np.asarray(ops)
    if ops.shape[1:] != (state.dim, state.dim):
        raise DomainError(f"operators of shape {ops.shape[1:]} on a state of dimension {state.dim}")
    if state.kind == "pure":
        vals = np.einsum("i,kij,j->k", state.data.conj(), ops, state.data)
    else:
        vals = np.einsum("ij,kji->k", state.data, ops)
    scale = np.maximum(1.0, np.abs(vals.real))
    if np.any(np.abs(vals.imag) > IMAG_TOL * scale):
        raise DomainError("expectation has a non-negligible imaginary part; operator not Hermitian")
    return vals.real


def hypercomplex_expectation(site: SiteObservables, local_state: QuantumState) -> Hypercomplex:
    """Component-wise expectation of a site's hypercomplex operator."""
    return Hypercomplex(expectations(site.stacked(), local_state))


def local_bound_operator(site: SiteObservables) -> np.ndarray:
    """Sum of squares of a site's observables."""
    return _frozen(sum(o @ o for o in site.operators))


def sample_hermitian(d: int, scale: float = 1.0, seed: int = 0) -> np.ndarray:
    """``scale * (G + G^dagger) / 2`` with ``G`` standard complex Gaussian."""
    if d < 1:
        raise DomainError("dimension must be positive")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return _frozen(scale * (g + g.conj().T) / 2)


def _random_vector(rng, d):
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def sample_pure_state(d: int, seed: int = 0) -> QuantumState:
    if d < 1:
        raise DomainError("dimension must be positive")
    return QuantumState("pure", _frozen(_random_vector(np.random.default_rng(seed), d)))


def sample_separable(site_dims: Sequence[int], rank: int = 1, seed: int = 0) -> tuple[SeparableEnsemble, QuantumState]:
    """Random mixture of ``rank`` product states of random pure site states.

    Returns the ensemble and the assembled global density matrix.
    """
    if rank < 1 or not site_dims or min(site_dims) < 1:
        raise DomainError("need rank >= 1 and positive site dimensions")
    rng = np.random.default_rng(seed)
    weights = rng.random(rank)
    weights /= weights.sum()
    factors = []
    rho = np.zeros((math.prod(site_dims),) * 2, dtype=complex)
    for p in weights:
        vecs = [_random_vector(rng, d) for d in site_dims]
        factors.append(tuple(np.outer(v, v.conj()) for v in vecs))
        glob = reduce(lambda a, b: np.multiply.outer(a, b).reshape(-1), vecs)
        rho += p * np.outer(glob, glob.conj())
    ens = SeparableEnsemble(weights, tuple(factors))
    return ens, QuantumState("density", _frozen((rho + rho.conj().T) / 2))


def ghz_state(n: int, d: int = 2) -> QuantumState:
    """``(|0...0> + |1...1> + ...)/sqrt(d)`` on ``n`` sites of dimension ``d``."""
    if n < 1 or d < 2:
        raise DomainError("GHZ state needs n >= 1 sites of dimension >= 2")
    psi = np.zeros(d**n, dtype=complex)
    step = sum(d**k for k in range(n))
    psi[[k * step for k in range(d)]] = 1 / np.sqrt(d)
    return QuantumState("pure", _frozen(psi))


def phi_plus() -> QuantumState:
    return ghz_state(2)


def singlet() -> QuantumState:
    return QuantumState("pure", _frozen(np.array([0, 1, -1, 0]) / np.sqrt(2)))


def hermitian_basis(d: int) -> np.ndarray:
    """Orthonormal (Hilbert-Schmidt) basis of ``d x d`` Hermitian matrices, shape ``(d*d, d, d)``."""
    basis = []
    for j in range(d):
        m = np.zeros((d, d), dtype=complex)
        m[j, j] = 1
        basis.append(m)
    for j in range(d):
        for k in range(j + 1, d):
            m = np.zeros((d, d), dtype=complex)
            m[j, k] = m[k, j] = 1 / np.sqrt(2)
            basis.append(m)
            m = np.zeros((d, d), dtype=complex)
            m[j, k], m[k, j] = -1j / np.sqrt(2), 1j / np.sqrt(2)
            basis.append(m)
    out = np.stack(basis)
    out.setflags(write=False)
    return out
