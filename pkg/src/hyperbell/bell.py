"""Bell-type inequalities built from grouped hypercomplex products.

For sites ``m = 1..n`` carrying Hermitian observables ``O_{m,0..K-1}``,
every separable state obeys

    sum_s <X_s>^2  <=  < F_1 x ... x F_n >,    F_m = sum_l O_{m,l}^2,

where ``X_s`` is the s-th real component of the grouped product of the
site operators ``O_{m,0} + O_{m,1} i_1 + ...``.  This module builds these
operators, evaluates both sides, scans random separable states and
searches for entangled states that break the bound.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import DomainError
from .forms import CoefficientTensor, Grouping, build_forms, grouped_product
from .hypercomplex import StructureTable, get_table, hc_norm
from .quantum import (
    MAX_GLOBAL_DIM,
    QuantumState,
    SiteObservables,
    expectation,
    expectations,
    hermitian_basis,
    hypercomplex_expectation,
    local_bound_operator,
    sample_separable,
    tensor_product,
)

UNDEFINED_RHS = 1e-12
SCAN_TOL = 1e-9
SEARCH_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class BellInstance:
    table: StructureTable
    sites: tuple
    grouping: Grouping | None = None

    def __post_init__(self):
        sites = tuple(s if isinstance(s, SiteObservables) else SiteObservables(tuple(s)) for s in self.sites)
        if not sites:
            raise DomainError("an instance needs at least one site")
        for m, site in enumerate(sites, 1):
            if site.K != self.table.dim:
                raise DomainError(f"site {m} has {site.K} observables, algebra needs {self.table.dim}")
        grouping = self.grouping if self.grouping is not None else Grouping.left(len(sites))
        if grouping.n != len(sites):
            raise DomainError(f"grouping leaf count {grouping.n} ≠ {len(sites)}")
        total = math.prod(s.dim for s in sites)
        if total > MAX_GLOBAL_DIM:
            raise DomainError(f"global dimension {total} exceeds the cap of {MAX_GLOBAL_DIM}")
        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "grouping", grouping)

    @property
    def K(self) -> int:
        return self.table.dim

    @property
    def n(self) -> int:
        return len(self.sites)

    @property
    def site_dims(self) -> tuple[int, ...]:
        return tuple(s.dim for s in self.sites)

    @property
    def global_dim(self) -> int:
        return math.prod(self.site_dims)

    @cached_property
    def forms(self) -> CoefficientTensor:
        return build_forms(self.table, self.n, self.grouping)

    @cached_property
    def global_operators(self) -> np.ndarray:
        ops = _contract_forms(self.forms.dense(), [s.stacked() for s in self.sites])
        ops.setflags(write=False)
        return ops

    @cached_property
    def bound_operator(self) -> np.ndarray:
        f = tensor_product([local_bound_operator(s) for s in self.sites])
        f.setflags(write=False)
        return f


def _contract_forms(coeffs: np.ndarray, stacks: Sequence[np.ndarray]) -> np.ndarray:
    # coeffs: (K,)*n + (K,); stacks[m]: (K, d_m, d_m).  Contract one site at a time,
    # growing the operator factor as a Kronecker product in site order.
    acc = np.einsum("l...,lab->...ab", coeffs, stacks[0])
    for ops in stacks[1:]:
        acc = np.einsum("l...ab,lcd->...acbd", acc, ops)
        sh = acc.shape
        acc = acc.reshape(sh[:-4] + (sh[-4] * sh[-3], sh[-2] * sh[-1]))
    return acc


def build_global_operators(instance: BellInstance) -> list[np.ndarray]:
    """The K Hermitian operators ``X_s`` on the full system."""
    return list(instance.global_operators)


@dataclass(frozen=True)
class InequalityReport:
    expectations: tuple
    lhs: float
    rhs: float
    ratio: float | None
    undefined: bool
    violated: bool
    grouping: str
    convention: str

    def to_dict(self) -> dict:
        return asdict(self)


def _report(vals, rhs, tol, instance) -> InequalityReport:
    lhs = float(np.dot(vals, vals))
    undefined = rhs < UNDEFINED_RHS
    ratio = None if undefined else lhs / rhs
    return InequalityReport(
        expectations=tuple(float(v) for v in vals),
        lhs=lhs,
        rhs=float(rhs),
        ratio=ratio,
        undefined=undefined,
        violated=(not undefined) and ratio > 1 + tol,
        grouping=str(instance.grouping),
        convention=instance.table.name,
    )


def evaluate(instance: BellInstance, state: QuantumState, tol: float = SCAN_TOL) -> InequalityReport:
    if state.dim != instance.global_dim:
        raise DomainError(f"state dimension {state.dim} ≠ product of site dimensions {instance.global_dim}")
    vals = expectations(instance.global_operators, state)
    rhs = expectation(instance.bound_operator, state)
    return _report(vals, rhs, tol, instance)


def factorized_evaluate(instance: BellInstance, local_states: Sequence[QuantumState]) -> float:
    """Left-hand side on a product state, via the product of per-site hypercomplex averages."""
    if len(local_states) != instance.n:
        raise DomainError(f"need {instance.n} local states, got {len(local_states)}")
    for m, (site, st) in enumerate(zip(instance.sites, local_states), 1):
        if site.dim != st.dim:
            raise DomainError(f"site {m}: state dimension {st.dim} ≠ observable dimension {site.dim}")
    averages = [hypercomplex_expectation(site, st) for site, st in zip(instance.sites, local_states)]
    return hc_norm(grouped_product(averages, instance.grouping, instance.table)) ** 2


@dataclass(frozen=True)
class ScanReport:
    samples: int
    rank: int
    seed: int
    max_ratio: float
    argmax_seed: int | None
    undefined_count: int
    violations: int
    histogram_edges: tuple
    histogram_counts: tuple
    above_one: int

    def to_dict(self) -> dict:
        return asdict(self)


HISTOGRAM_EDGES = tuple(round(0.05 * k, 2) for k in range(21))


def separable_scan(
    instance: BellInstance,
    samples: int,
    rank: int = 2,
    seed: int = 0,
    tol: float = SCAN_TOL,
    workers: int = 1,
) -> ScanReport:
    """Evaluate ``samples`` random separable states; sample ``k`` uses seed ``seed + k``."""
    if samples < 1:
        raise DomainError("need at least one sample")

    def one(k):
        _, state = sample_separable(instance.site_dims, rank, seed + k)
        return evaluate(instance, state, tol).ratio

    # build the cached operators once before fanning out
    instance.global_operators, instance.bound_operator
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            ratios = list(pool.map(one, range(samples)))
    else:
        ratios = [one(k) for k in range(samples)]

    defined = [(r, k) for k, r in enumerate(ratios) if r is not None]
    if defined:
        best, k_best = max(defined, key=lambda rk: (rk[0], -rk[1]))
        argmax = seed + k_best
    else:
        best, argmax = 0.0, None
    values = np.array([r for r, _ in defined])
    counts, _ = np.histogram(values[values <= 1.0], bins=np.array(HISTOGRAM_EDGES))
    return ScanReport(
        samples=samples,
        rank=rank,
        seed=seed,
        max_ratio=float(best),
        argmax_seed=argmax,
        undefined_count=samples - len(defined),
        violations=sum(1 for r, _ in defined if r > 1 + tol),
        histogram_edges=HISTOGRAM_EDGES,
        histogram_counts=tuple(int(c) for c in counts),
        above_one=int(np.sum(values > 1.0)),
    )


@dataclass(frozen=True)
class SearchConfig:
    restarts: int = 20
    iterations: int = 500
    step_start: float = 0.3
    step_end: float = 0.003
    seed: int = 0
    refine: int = 0
    refine_h: float = 1e-5

    def step(self, it: int) -> float:
        """Geometric decay from ``step_start`` to ``step_end`` over the iterations."""
        if self.iterations <= 1:
            return self.step_start
        return self.step_start * (self.step_end / self.step_start) ** (it / (self.iterations - 1))


@dataclass(frozen=True)
class SearchReport:
    best: InequalityReport
    observables: tuple
    state: np.ndarray
    trace: tuple
    restarts: int
    seed: int
    config: SearchConfig

    @property
    def best_ratio(self) -> float:
        return self.best.ratio if self.best.ratio is not None else 0.0

    @property
    def violated(self) -> bool:
        return self.best_ratio > 1 + SEARCH_TOL

    def instance(self, table: StructureTable, grouping: Grouping) -> BellInstance:
        return BellInstance(table, tuple(SiteObservables(tuple(ops)) for ops in self.observables), grouping)

    def to_dict(self) -> dict:
        return {
            "best": self.best.to_dict(),
            "best_ratio": self.best_ratio,
            "violated": self.violated,
            "observables": [[_complex_rows(o) for o in site] for site in self.observables],
            "state": [[float(z.real), float(z.imag)] for z in self.state],
            "trace": [list(t) for t in self.trace],
            "restarts": self.restarts,
            "seed": self.seed,
            "config": asdict(self.config),
        }


def _complex_rows(m):
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


class _Template:
    """Decodes flat real parameter vectors into observables and a pure state.

    Layout: for each site, ``K`` blocks of ``d*d`` coefficients in
    :func:`hermitian_basis`, then real and imaginary parts of the state.
    Each site's block and the state block are kept at unit norm; the
    ratio is invariant under both rescalings, and equal block norms keep
    one step size meaningful for every block.
    """

    def __init__(self, site_dims, table, grouping):
        self.site_dims = tuple(site_dims)
        self.table = table
        self.grouping = grouping
        self.bases = [hermitian_basis(d) for d in self.site_dims]
        self.n_obs = sum(table.dim * d * d for d in self.site_dims)
        self.global_dim = math.prod(self.site_dims)
        self.size = self.n_obs + 2 * self.global_dim
        edges = np.cumsum([0] + [table.dim * d * d for d in self.site_dims] + [2 * self.global_dim])
        self.blocks = list(zip(edges[:-1], edges[1:]))

    def decode(self, theta):
        ops, pos = [], 0
        for d, basis in zip(self.site_dims, self.bases):
            site = []
            for _ in range(self.table.dim):
                site.append(np.tensordot(theta[pos : pos + d * d], basis, axes=1))
                pos += d * d
            ops.append(site)
        z = theta[pos : pos + self.global_dim] + 1j * theta[pos + self.global_dim :]
        return ops, z / np.linalg.norm(z)

    def normalize(self, theta):
        theta = theta.copy()
        for a, b in self.blocks:
            theta[a:b] /= np.linalg.norm(theta[a:b])
        return theta

    def report(self, theta, tol=SEARCH_TOL) -> InequalityReport:
        ops, psi = self.decode(theta)
        inst = BellInstance(self.table, tuple(SiteObservables(tuple(s)) for s in ops), self.grouping)
        return evaluate(inst, QuantumState("pure", psi), tol)

    def score(self, theta) -> float:
        r = self.report(theta)
        return r.ratio if r.ratio is not None else 0.0


def violation_search(
    site_dims: Sequence[int],
    K: int,
    grouping: Grouping | None = None,
    convention: str | StructureTable | None = None,
    config: SearchConfig = SearchConfig(),
) -> SearchReport:
    """Maximize lhs/rhs over site observables and a global pure state.

    Multi-restart stochastic hill climbing: restart ``r`` draws its start
    point from seed ``config.seed + r``, then proposes Gaussian moves with
    a geometrically shrinking step and keeps a move only if it improves
    the ratio.  The best restart can be polished with central-difference
    gradient steps (``config.refine``).
    """
    table = convention if isinstance(convention, StructureTable) else get_table(K, convention)
    if table.dim != K:
        raise DomainError(f"convention {table.name!r} has dimension {table.dim}, not {K}")
    site_dims = tuple(int(d) for d in site_dims)
    if not site_dims or min(site_dims) < 1:
        raise DomainError("site dimensions must be positive")
    if math.prod(site_dims) > MAX_GLOBAL_DIM:
        raise DomainError(f"global dimension {math.prod(site_dims)} exceeds the cap of {MAX_GLOBAL_DIM}")
    grouping = grouping if grouping is not None else Grouping.left(len(site_dims))
    if grouping.n != len(site_dims):
        raise DomainError(f"grouping leaf count {grouping.n} ≠ {len(site_dims)}")
    if config.restarts < 1 or config.iterations < 0:
        raise DomainError("need restarts >= 1 and iterations >= 0")

    tpl = _Template(site_dims, table, grouping)
    trace = []
    best_theta, best_score = None, -math.inf
    for r in range(config.restarts):
        rng = np.random.default_rng(config.seed + r)
        theta = tpl.normalize(rng.standard_normal(tpl.size))
        score = tpl.score(theta)
        trace.append((r, 0, score))
        for it in range(config.iterations):
            cand = tpl.normalize(theta + config.step(it) * rng.standard_normal(tpl.size))
            cs = tpl.score(cand)
            if cs > score:
                theta, score = cand, cs
                trace.append((r, it + 1, score))
        if score > best_score:
            best_theta, best_score = theta, score

    if config.refine > 0:
        best_theta, best_score = _refine(tpl, best_theta, best_score, config, trace)

    ops, psi = tpl.decode(best_theta)
    return SearchReport(
        best=tpl.report(best_theta),
        observables=tuple(tuple(np.asarray(o) for o in site) for site in ops),
        state=psi,
        trace=tuple(trace),
        restarts=config.restarts,
        seed=config.seed,
        config=config,
    )


def central_gradient(f, theta, h: float = 1e-5) -> np.ndarray:
    grad = np.empty_like(theta)
    for k in range(theta.size):
        e = np.zeros_like(theta)
        e[k] = h
        grad[k] = (f(theta + e) - f(theta - e)) / (2 * h)
    return grad


def _refine(tpl, theta, score, config, trace):
    lr = config.step_end
    for k in range(config.refine):
        g = central_gradient(tpl.score, theta, config.refine_h)
        cand = tpl.normalize(theta + lr * g)
        cs = tpl.score(cand)
        if cs > score:
            theta, score = cand, cs
            lr *= 1.5
            trace.append((-1, k + 1, score))
        else:
            lr *= 0.5
    return theta, score
