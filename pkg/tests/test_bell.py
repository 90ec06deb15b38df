import numpy as np
import pytest

from hyperbell import (
    COMPLEX,
    DEGEN,
    QUATERNION,
    TABLE1,
    BellInstance,
    DomainError,
    QuantumState,
    SearchConfig,
    SiteObservables,
    build_global_operators,
    enumerate_groupings,
    evaluate,
    factorized_evaluate,
    parse_grouping,
    sample_pure_state,
    sample_separable,
    separable_scan,
    violation_search,
)
from hyperbell.bell import central_gradient
from hyperbell.quantum import PAULI_X as X
from hyperbell.quantum import PAULI_Y as Y
from hyperbell.quantum import ghz_state, phi_plus

from helpers import (
    commuting_instance,
    kron_states,
    operators_from_transcription,
    pauli_instance,
    product_states,
    random_instance,
    random_sites,
)
from transcribed import BIPARTITE_EIGHT, BIPARTITE_FOUR, BIPARTITE_TWO, parse_bilinear_forms

TABLES = [COMPLEX, QUATERNION, TABLE1, DEGEN]


def test_global_operators_two_components():
    (a1, b1), (a2, b2) = random_sites(2, (2, 3), seed=1)
    x0, x1 = build_global_operators(BellInstance(COMPLEX, [(a1, b1), (a2, b2)]))
    np.testing.assert_allclose(x0, np.kron(a1, a2) - np.kron(b1, b2), atol=1e-13)
    np.testing.assert_allclose(x1, np.kron(b1, a2) + np.kron(a1, b2), atol=1e-13)


@pytest.mark.parametrize(
    "table, transcription",
    [(COMPLEX, BIPARTITE_TWO), (QUATERNION, BIPARTITE_FOUR), (DEGEN, BIPARTITE_EIGHT)],
    ids=["two", "four", "eight"],
)
def test_global_operators_match_transcribed_bipartite_inequalities(table, transcription):
    s1, s2 = random_sites(table.dim, (2, 2), seed=table.dim)
    expected = operators_from_transcription(parse_bilinear_forms(transcription), s1, s2)
    got = build_global_operators(BellInstance(table, [s1, s2]))
    for g, e in zip(got, expected):
        np.testing.assert_allclose(g, e, atol=1e-13)


def test_single_site_operators_are_the_observables():
    a, b = random_sites(2, (3,), seed=2)[0]
    x0, x1 = build_global_operators(BellInstance(COMPLEX, [(a, b)]))
    np.testing.assert_allclose(x0, a)
    np.testing.assert_allclose(x1, b)


@pytest.mark.parametrize("table", TABLES, ids=lambda t: t.name)
def test_global_operators_are_hermitian(table):
    for g in enumerate_groupings(3):
        for x in build_global_operators(random_instance(table, (2, 3, 2), seed=5, grouping=g)):
            np.testing.assert_allclose(x, x.conj().T, atol=1e-12)


def _brute_force_ratio(n, state):
    # lhs = |<f x ... x f>|^2 with f = X + iY, rhs = <(X^2 + Y^2) x ... x (X^2 + Y^2)>
    f = X + 1j * Y
    op, bound = f, X @ X + Y @ Y
    full_bound = bound
    for _ in range(n - 1):
        op = np.kron(op, f)
        full_bound = np.kron(full_bound, bound)
    psi = state.data
    return abs(np.vdot(psi, op @ psi)) ** 2, np.vdot(psi, full_bound @ psi).real


def test_ghz_violation_witness():
    lhs_ref, rhs_ref = _brute_force_ratio(3, ghz_state(3))
    assert (lhs_ref, rhs_ref) == pytest.approx((16.0, 8.0), abs=1e-12)
    for g in enumerate_groupings(3):
        rep = evaluate(pauli_instance(COMPLEX, 3, g), ghz_state(3))
        assert rep.lhs == pytest.approx(lhs_ref, abs=1e-9)
        assert rep.rhs == pytest.approx(rhs_ref, abs=1e-9)
        assert rep.ratio == pytest.approx(2.0, abs=1e-9)
        assert rep.violated and not rep.undefined
        assert rep.grouping == str(g) and rep.convention == "complex"


def test_phi_plus_equality():
    lhs_ref, rhs_ref = _brute_force_ratio(2, phi_plus())
    rep = evaluate(pauli_instance(COMPLEX, 2), phi_plus())
    assert (rep.lhs, rep.rhs) == pytest.approx((lhs_ref, rhs_ref), abs=1e-12)
    assert (rep.lhs, rep.rhs) == pytest.approx((4.0, 4.0), abs=1e-12)
    assert not rep.violated


def test_zero_observables_give_undefined_ratio():
    zero = np.zeros((2, 2))
    rep = evaluate(BellInstance(COMPLEX, [(zero, zero)] * 2), phi_plus())
    assert rep.lhs == 0 and rep.rhs == 0
    assert rep.undefined and rep.ratio is None and not rep.violated


def test_instance_validation():
    with pytest.raises(DomainError, match="observables"):
        BellInstance(QUATERNION, [(X, Y)] * 2)
    with pytest.raises(DomainError, match="leaf count"):
        BellInstance(COMPLEX, [(X, Y)] * 2, parse_grouping("((1 2) 3)"))
    with pytest.raises(DomainError, match="cap"):
        BellInstance(COMPLEX, [(X, Y)] * 13)
    with pytest.raises(DomainError, match="dimension"):
        evaluate(pauli_instance(COMPLEX, 2), ghz_state(3))


@pytest.mark.parametrize("table", TABLES, ids=lambda t: t.name)
@pytest.mark.parametrize("dims", [(2, 2), (2, 3, 2), (3, 3, 3)])
def test_factorization_identity(table, dims):
    for g in enumerate_groupings(len(dims)):
        inst = random_instance(table, dims, seed=len(dims), grouping=g)
        for k in range(25):
            local = product_states(dims, seed=k)
            lhs = evaluate(inst, kron_states(local)).lhs
            assert abs(lhs - factorized_evaluate(inst, local)) <= 1e-10 * max(1.0, lhs)


def test_factorized_single_site_and_zero():
    a, b, c, d = random_sites(4, (3,), seed=8)[0]
    st = sample_pure_state(3, 1)
    inst = BellInstance(QUATERNION, [(a, b, c, d)])
    expected = sum(np.vdot(st.data, o @ st.data).real ** 2 for o in (a, b, c, d))
    assert factorized_evaluate(inst, [st]) == pytest.approx(expected, rel=1e-12)
    zero = np.zeros((2, 2))
    assert factorized_evaluate(BellInstance(COMPLEX, [(zero, zero)] * 2), [sample_pure_state(2, 0)] * 2) == 0.0
    with pytest.raises(DomainError):
        factorized_evaluate(inst, [st, st])


@pytest.mark.parametrize("table", TABLES, ids=lambda t: t.name)
@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("kind", ["random", "commuting"])
def test_separable_scan_qutrits(table, n, kind):
    build = random_instance if kind == "random" else commuting_instance
    for g in enumerate_groupings(n):
        rep = separable_scan(build(table, (3,) * n, seed=n, grouping=g), samples=10_000, rank=2, seed=17)
        assert rep.max_ratio <= 1 + 1e-9
        assert rep.violations == 0 and rep.above_one == 0


def test_saturated_by_product_eigenstates():
    inst = commuting_instance(DEGEN, (2, 3, 2), seed=4, grouping=enumerate_groupings(3)[0])
    basis = [QuantumState.pure(np.eye(d)[k]) for d, k in zip((2, 3, 2), (1, 2, 0))]
    rep = evaluate(inst, kron_states(basis))
    assert rep.ratio == pytest.approx(1.0, abs=1e-12)


def test_scan_rank_one_matches_factorization():
    inst = random_instance(TABLE1, (2, 2, 2), seed=3, grouping=enumerate_groupings(3)[0])
    for seed in range(50):
        ens, state = sample_separable(inst.site_dims, 1, seed)
        local = [QuantumState.density(r) for r in ens.factors[0]]
        lhs = evaluate(inst, state).lhs
        assert abs(lhs - factorized_evaluate(inst, local)) <= 1e-10 * max(1.0, lhs)


def test_scan_is_deterministic_and_argmax_reproduces():
    inst = random_instance(DEGEN, (2, 2), seed=9)
    a = separable_scan(inst, 300, rank=2, seed=42)
    b = separable_scan(inst, 300, rank=2, seed=42)
    assert a == b
    assert separable_scan(inst, 1, seed=5) == separable_scan(inst, 1, seed=5)
    _, state = sample_separable(inst.site_dims, 2, a.argmax_seed)
    assert evaluate(inst, state).ratio == a.max_ratio
    assert sum(a.histogram_counts) + a.above_one + a.undefined_count == a.samples


def test_scan_workers_are_schedule_independent():
    inst = random_instance(QUATERNION, (2, 2, 2), seed=2)
    assert separable_scan(inst, 200, seed=3, workers=4) == separable_scan(inst, 200, seed=3)


@pytest.mark.parametrize("table", [COMPLEX, QUATERNION], ids=lambda t: t.name)
def test_grouping_invariance_for_associative_algebras(table):
    for seed in range(10):
        state = sample_pure_state(8, seed)
        reports = [evaluate(random_instance(table, (2, 2, 2), seed=1, grouping=g), state) for g in enumerate_groupings(3)]
        for r in reports[1:]:
            np.testing.assert_allclose(r.expectations, reports[0].expectations, atol=1e-12)
            assert r.lhs == pytest.approx(reports[0].lhs, rel=1e-12)
            assert r.rhs == pytest.approx(reports[0].rhs, rel=1e-12)


def _pad(inst, table, signs=None):
    return BellInstance(table, tuple(s.padded(table.dim, signs) for s in inst.sites), inst.grouping)


@pytest.mark.parametrize("n", [2, 3])
def test_hierarchy(n):
    for seed in range(20):
        state = sample_pure_state(2**n, seed) if seed % 2 else sample_separable((2,) * n, 3, seed)[1]
        for g in enumerate_groupings(n):
            base2 = random_instance(COMPLEX, (2,) * n, seed=seed, grouping=g)
            ref = evaluate(base2, state)
            for table in (QUATERNION, TABLE1, DEGEN):
                rep = evaluate(_pad(base2, table), state)
                assert abs(rep.lhs - ref.lhs) <= 1e-10 * max(1.0, ref.lhs)
                assert abs(rep.rhs - ref.rhs) <= 1e-10 * max(1.0, ref.rhs)
            base4 = random_instance(QUATERNION, (2,) * n, seed=seed, grouping=g)
            ref4 = evaluate(base4, state)
            rep8 = evaluate(_pad(base4, DEGEN, signs=[1, 1, 1, -1]), state)
            assert abs(rep8.lhs - ref4.lhs) <= 1e-10 * max(1.0, ref4.lhs)
            assert abs(rep8.rhs - ref4.rhs) <= 1e-10 * max(1.0, ref4.rhs)


def test_hierarchy_needs_the_sign_flip():
    base4 = random_instance(QUATERNION, (2, 2), seed=0)
    state = sample_pure_state(4, 0)
    assert evaluate(_pad(base4, DEGEN), state).lhs != pytest.approx(evaluate(base4, state).lhs, rel=1e-6)


def test_complex_lhs_is_squared_modulus_of_product():
    for seed in range(20):
        (a1, b1), (a2, b2) = random_sites(2, (2, 3), seed)
        state = sample_pure_state(6, seed)
        direct = abs(np.vdot(state.data, np.kron(a1 + 1j * b1, a2 + 1j * b2) @ state.data)) ** 2
        rep = evaluate(BellInstance(COMPLEX, [(a1, b1), (a2, b2)]), state)
        assert rep.lhs == pytest.approx(direct, abs=1e-10)


def test_search_zero_iterations_is_initial_point():
    config = SearchConfig(restarts=1, iterations=0, seed=5)
    rep = violation_search((2, 2), 2, config=config)
    inst = rep.instance(COMPLEX, parse_grouping("(1 2)"))
    again = evaluate(inst, QuantumState.pure(rep.state), tol=1e-6)
    assert again.ratio == pytest.approx(rep.best_ratio, rel=1e-12)
    assert rep.trace == ((0, 0, rep.best_ratio),)


def test_search_is_deterministic_and_trace_consistent():
    config = SearchConfig(restarts=3, iterations=60, seed=11)
    a = violation_search((2, 2, 2), 2, config=config)
    b = violation_search((2, 2, 2), 2, config=config)
    assert a.to_dict() == b.to_dict()
    assert max(r for _, _, r in a.trace) == a.best_ratio
    for r in range(3):
        ratios = [v for rr, _, v in a.trace if rr == r]
        assert ratios == sorted(ratios)


def test_bipartite_qubit_search_finds_no_violation():
    rep = violation_search((2, 2), 2, config=SearchConfig(restarts=20, iterations=500, seed=0))
    assert rep.best_ratio <= 1 + 1e-6
    assert not rep.violated


def test_refinement_never_lowers_the_ratio():
    base = violation_search((2, 2, 2), 2, config=SearchConfig(restarts=2, iterations=50, seed=1))
    refined = violation_search((2, 2, 2), 2, config=SearchConfig(restarts=2, iterations=50, seed=1, refine=5))
    assert refined.best_ratio >= base.best_ratio


def test_central_gradient_on_quadratic():
    a = np.array([[2.0, 0.5], [0.5, 1.0]])
    f = lambda x: float(x @ a @ x)
    x = np.array([0.3, -1.2])
    np.testing.assert_allclose(central_gradient(f, x, 1e-5), 2 * a @ x, rtol=1e-8)


def test_search_rejects_bad_templates():
    with pytest.raises(DomainError, match="cap"):
        violation_search((2,) * 13, 2)
    with pytest.raises(DomainError):
        violation_search((2, 2), 4, convention="degen")
    with pytest.raises(DomainError, match="leaf count"):
        violation_search((2, 2), 2, grouping=parse_grouping("((1 2) 3)"))
