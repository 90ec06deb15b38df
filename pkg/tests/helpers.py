import itertools

import numpy as np

from hyperbell import BellInstance, sample_hermitian
from hyperbell.quantum import PAULI_X, PAULI_Y


def random_sites(K, dims, seed):
    return [tuple(sample_hermitian(d, 1.0, seed * 10_000 + 100 * m + l) for l in range(K)) for m, d in enumerate(dims)]


def random_instance(table, dims, seed, grouping=None):
    return BellInstance(table, random_sites(table.dim, dims, seed), grouping)


def commuting_instance(table, dims, seed, grouping=None):
    """Diagonal observables: product basis states saturate the bound."""
    rng = np.random.default_rng(seed)
    sites = [tuple(np.diag(rng.standard_normal(d)).astype(complex) for _ in range(table.dim)) for d in dims]
    return BellInstance(table, sites, grouping)


def pauli_instance(table, n, grouping=None):
    """X and Y on every site, remaining components zero."""
    zero = np.zeros((2, 2), dtype=complex)
    site = (PAULI_X, PAULI_Y) + (zero,) * (table.dim - 2)
    return BellInstance(table, [site] * n, grouping)


def operators_from_transcription(entries, ops1, ops2):
    """Assemble X_s = sum sign * O1[p] (x) O2[q] directly from a ``{(p, q): (sign, s)}`` map."""
    K = len(ops1)
    out = [np.zeros((ops1[0].shape[0] * ops2[0].shape[0],) * 2, dtype=complex) for _ in range(K)]
    for (p, q), (sign, s) in entries.items():
        out[s] += sign * np.kron(ops1[p], ops2[q])
    return out


def product_states(dims, seed):
    from hyperbell import sample_pure_state

    return [sample_pure_state(d, seed * 100 + m) for m, d in enumerate(dims)]


def kron_states(states):
    from hyperbell import QuantumState

    psi = states[0].data
    for s in states[1:]:
        psi = np.kron(psi, s.data)
    return QuantumState("pure", psi)
