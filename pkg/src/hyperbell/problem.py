"""Problem files (JSON) and report serialization.

A problem file looks like::

    {
      "algebra": 2,
      "convention": "complex",
      "grouping": "((1 2) 3)",
      "sites": [
        {"dim": 2, "observables": ["X", "Y"]},
        {"dim": 2, "observables": [{"dim": 2, "entries": [[0,0],[1,0],[1,0],[0,0]]}, "Y"]},
        ...
      ],
      "state": {"kind": "named", "name": "ghz"}
    }

Matrices are ``{"dim": d, "entries": [...]}`` with ``d*d`` complex entries
in row-major order, each a ``[re, im]`` pair (nested rows are accepted
too).  Qubit sites may use the names ``I``, ``X``, ``Y``, ``Z`` or ``0``.
State kinds: ``pure`` (``"vector"``), ``density`` (``"matrix"``),
``separable`` (``"terms": [{"weight": p, "factors": [matrix, ...]}]``) and
``named`` (``ghz``, ``phi+``, ``singlet``).
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bell import BellInstance
from .errors import DomainError
from .forms import Grouping, parse_grouping
from .hypercomplex import DEFAULT_CONVENTION, get_table
from .quantum import (
    PAULI_I,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    QuantumState,
    SeparableEnsemble,
    SiteObservables,
    ghz_state,
    hermitian,
    phi_plus,
    singlet,
)

NAMED_OPERATORS = {"I": PAULI_I, "X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z, "0": np.zeros((2, 2), dtype=complex)}
NAMED_STATES = ("ghz", "phi+", "singlet")


class ProblemError(DomainError):
    """Invalid problem file; the message starts with the offending field path."""

    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


@dataclass(eq=False)
class ProblemFile:
    algebra: int
    convention: str
    grouping: str
    sites: list  # per site: list of K complex (d, d) arrays
    state: dict = field(default_factory=lambda: {"kind": "named", "name": "ghz"})

    @property
    def site_dims(self) -> tuple[int, ...]:
        return tuple(ops[0].shape[0] for ops in self.sites)

    def instance(self, grouping: Grouping | None = None) -> BellInstance:
        table = get_table(self.algebra, self.convention)
        sites = tuple(SiteObservables(tuple(ops)) for ops in self.sites)
        return BellInstance(table, sites, grouping or parse_grouping(self.grouping, len(sites)))

    def quantum_state(self) -> QuantumState:
        return _build_state(self.state, self.site_dims)

    def to_json(self) -> dict:
        return {
            "algebra": self.algebra,
            "convention": self.convention,
            "grouping": self.grouping,
            "sites": [{"dim": ops[0].shape[0], "observables": [matrix_to_json(o) for o in ops]} for ops in self.sites],
            "state": self.state,
        }

    def __eq__(self, other):
        if not isinstance(other, ProblemFile):
            return NotImplemented
        return canonical_json(self.to_json()) == canonical_json(other.to_json())


def matrix_to_json(m) -> dict:
    m = np.asarray(m, dtype=complex)
    return {"dim": m.shape[0], "entries": [[float(z.real), float(z.imag)] for z in m.reshape(-1)]}


def _complex(value, where):
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(isinstance(v, (int, float)) for v in value):
        return complex(value[0], value[1])
    raise ProblemError(where, f"complex entry must be a number or [re, im], got {value!r}")


def matrix_from_json(obj, where: str) -> np.ndarray:
    if isinstance(obj, str):
        try:
            return NAMED_OPERATORS[obj.upper()].copy()
        except KeyError:
            raise ProblemError(where, f"unknown operator name {obj!r}; known: {sorted(NAMED_OPERATORS)}") from None
    if not isinstance(obj, dict) or "entries" not in obj:
        raise ProblemError(where, "matrix must be an object with 'dim' and 'entries'")
    entries = obj["entries"]
    if entries and isinstance(entries[0], list) and entries[0] and isinstance(entries[0][0], list):
        entries = [z for row in entries for z in row]  # nested rows
    d = obj.get("dim")
    if d is None:
        d = int(round(len(entries) ** 0.5))
    if not isinstance(d, int) or d < 1:
        raise ProblemError(f"{where}.dim", f"must be a positive integer, got {d!r}")
    if len(entries) != d * d:
        raise ProblemError(f"{where}.entries", f"expected {d * d} entries for dim {d}, got {len(entries)}")
    vals = [_complex(z, f"{where}.entries[{k}]") for k, z in enumerate(entries)]
    return np.array(vals, dtype=complex).reshape(d, d)


def _vector_from_json(entries, where):
    if not isinstance(entries, list) or not entries:
        raise ProblemError(where, "vector must be a non-empty array")
    return np.array([_complex(z, f"{where}[{k}]") for k, z in enumerate(entries)], dtype=complex)


def _build_state(obj: dict, site_dims) -> QuantumState:
    where = "state"
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ProblemError(where, "must be an object with a 'kind'")
    kind = obj["kind"]
    total = int(np.prod(site_dims))
    try:
        if kind == "named":
            name = str(obj.get("name", "")).lower()
            if name == "ghz":
                if len(set(site_dims)) != 1:
                    raise ProblemError(f"{where}.name", "ghz needs equal site dimensions")
                state = ghz_state(len(site_dims), site_dims[0])
            elif name in ("phi+", "singlet"):
                if tuple(site_dims) != (2, 2):
                    raise ProblemError(f"{where}.name", f"{name} needs two qubit sites")
                state = phi_plus() if name == "phi+" else singlet()
            else:
                raise ProblemError(f"{where}.name", f"unknown state {name!r}; known: {list(NAMED_STATES)}")
        elif kind == "pure":
            psi = _vector_from_json(obj.get("vector"), f"{where}.vector")
            state = QuantumState.pure(psi)
        elif kind == "density":
            rho = matrix_from_json(obj.get("matrix"), f"{where}.matrix")
            state = QuantumState.density(rho)
        elif kind == "separable":
            terms = obj.get("terms")
            if not isinstance(terms, list) or not terms:
                raise ProblemError(f"{where}.terms", "must be a non-empty array")
            weights, factors = [], []
            for j, term in enumerate(terms):
                w = f"{where}.terms[{j}]"
                if len(term.get("factors", [])) != len(site_dims):
                    raise ProblemError(f"{w}.factors", f"need one factor per site ({len(site_dims)})")
                weights.append(float(term.get("weight", 0.0)))
                fs = []
                for m, f in enumerate(term["factors"]):
                    try:
                        fs.append(QuantumState.density(matrix_from_json(f, f"{w}.factors[{m}]")).data)
                    except ProblemError:
                        raise
                    except DomainError as exc:
                        raise ProblemError(f"{w}.factors[{m}]", str(exc)) from None
                factors.append(fs)
            ens = SeparableEnsemble(np.array(weights), tuple(factors))
            state = QuantumState.density(ens.density_matrix())
        else:
            raise ProblemError(f"{where}.kind", f"unknown kind {kind!r}; use pure, density, separable or named")
    except ProblemError:
        raise
    except DomainError as exc:
        raise ProblemError(where, str(exc)) from None
    if state.dim != total:
        raise ProblemError(where, f"state dimension {state.dim} ≠ product of site dimensions {total}")
    return state


def problem_from_json(obj: dict) -> ProblemFile:
    if not isinstance(obj, dict):
        raise ProblemError("<root>", "problem must be a JSON object")
    algebra = obj.get("algebra", obj.get("K"))
    if algebra not in (1, 2, 4, 8):
        raise ProblemError("algebra", f"must be one of 1, 2, 4, 8, got {algebra!r}")
    convention = obj.get("convention") or DEFAULT_CONVENTION[algebra]
    try:
        get_table(algebra, convention)
    except DomainError as exc:
        raise ProblemError("convention", str(exc)) from None
    sites_in = obj.get("sites")
    if not isinstance(sites_in, list) or not sites_in:
        raise ProblemError("sites", "must be a non-empty array")
    sites = []
    for m, site in enumerate(sites_in):
        w = f"sites[{m}]"
        if not isinstance(site, dict):
            raise ProblemError(w, "site must be an object with 'dim' and 'observables'")
        ops_in = site.get("observables")
        if not isinstance(ops_in, list) or len(ops_in) != algebra:
            got = len(ops_in) if isinstance(ops_in, list) else ops_in
            raise ProblemError(f"{w}.observables", f"need {algebra} observables, got {got}")
        ops = []
        for l, o in enumerate(ops_in):
            m_ = matrix_from_json(o, f"{w}.observables[{l}]")
            if "dim" in site and m_.shape[0] != site["dim"]:
                raise ProblemError(f"{w}.observables[{l}]", f"dimension {m_.shape[0]} ≠ site dim {site['dim']}")
            try:
                ops.append(np.array(hermitian(m_)))
            except DomainError as exc:
                raise ProblemError(f"{w}.observables[{l}]", str(exc)) from None
        if len({o.shape for o in ops}) != 1:
            raise ProblemError(f"{w}.observables", "observables on a site must share one dimension")
        sites.append(ops)
    n = len(sites)
    grouping_text = obj.get("grouping") or str(Grouping.left(n))
    try:
        grouping = parse_grouping(grouping_text, n)
    except DomainError as exc:
        raise ProblemError("grouping", str(exc)) from None
    problem = ProblemFile(algebra, convention, str(grouping), sites, obj.get("state", {"kind": "named", "name": "ghz"}))
    try:
        problem.instance()
    except DomainError as exc:
        raise ProblemError("sites", str(exc)) from None
    problem.quantum_state()
    return problem


def load_problem(path) -> ProblemFile:
    text = Path(path).read_text()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemError(f"line {exc.lineno} column {exc.colno}", exc.msg) from None
    return problem_from_json(obj)


def parse_problem(path) -> tuple[BellInstance, QuantumState]:
    problem = load_problem(path)
    return problem.instance(), problem.quantum_state()


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def save_problem(problem: ProblemFile, path) -> None:
    Path(path).write_text(canonical_json(problem.to_json()))


def file_sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
