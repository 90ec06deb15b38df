import itertools

import numpy as np
import pytest

from hyperbell import (
    COMPLEX,
    DEGEN,
    QUATERNION,
    TABLE1,
    DomainError,
    Grouping,
    Hypercomplex,
    build_forms,
    catalan,
    enumerate_groupings,
    grouped_product,
    grouped_unit_product,
    parse_grouping,
)

from transcribed import (
    BIPARTITE_EIGHT,
    BIPARTITE_FOUR,
    BIPARTITE_TWO,
    COMPLEX_TWO_SQUARE,
    DEGEN_EIGHT_SQUARE,
    EULER_FOUR_SQUARE,
    parse_bilinear_forms,
)


def count_bracketings(n):
    """Brute force: number of ways to fully bracket n ordered factors."""
    if n == 1:
        return 1
    return sum(count_bracketings(k) * count_bracketings(n - k) for k in range(1, n))


@pytest.mark.parametrize("n", range(1, 9))
def test_catalan_counts(n):
    groupings = enumerate_groupings(n)
    assert len(groupings) == catalan(n) == count_bracketings(n)
    assert len({str(g) for g in groupings}) == len(groupings)


def test_catalan_examples():
    assert len(enumerate_groupings(2)) == 1
    assert [str(g) for g in enumerate_groupings(3)] == ["(1 (2 3))", "((1 2) 3)"]
    assert len(enumerate_groupings(5)) == 14
    assert [catalan(n) for n in range(2, 7)] == [1, 2, 5, 14, 42]
    with pytest.raises(DomainError):
        enumerate_groupings(0)


def test_grouping_text_round_trip():
    for n in range(1, 6):
        for g in enumerate_groupings(n):
            assert parse_grouping(str(g)) == g
    assert str(Grouping.left(3)) == "((1 2) 3)"


@pytest.mark.parametrize(
    "text, n, message",
    [
        ("((1 2) 3)", 2, "leaf count 3 ≠ 2"),
        ("((1 3) 2)", None, "1..n"),
        ("(1 2 3)", None, "binary"),
        ("((1 2) 3", None, "early"),
        ("(1 2))", None, "trailing"),
        ("(1 x)", None, "bad grouping"),
    ],
)
def test_bad_grouping_strings(text, n, message):
    with pytest.raises(DomainError, match=message):
        parse_grouping(text, n)


def test_grouped_unit_product_examples():
    left, right = parse_grouping("((1 2) 3)"), parse_grouping("(1 (2 3))")
    assert grouped_unit_product(TABLE1, (1, 2, 3), left) == (-1, 6)
    assert grouped_unit_product(TABLE1, (1, 2, 3), right) == (1, 6)
    for g in enumerate_groupings(4):
        assert grouped_unit_product(DEGEN, (0, 0, 0, 0), g) == (1, 0)
    with pytest.raises(DomainError):
        grouped_unit_product(TABLE1, (1, 2), left)


def _tensor_map(tensor):
    return {tup: tensor.entry(*tup) for tup in itertools.product(range(tensor.dim), repeat=tensor.n)}


@pytest.mark.parametrize(
    "table, transcription",
    [
        (COMPLEX, COMPLEX_TWO_SQUARE),
        (COMPLEX, BIPARTITE_TWO),
        (QUATERNION, EULER_FOUR_SQUARE),
        (QUATERNION, BIPARTITE_FOUR),
        (DEGEN, DEGEN_EIGHT_SQUARE),
        (DEGEN, BIPARTITE_EIGHT),
    ],
    ids=["two-square", "two-operator", "four-square", "four-operator", "eight-square", "eight-operator"],
)
def test_bipartite_expansion_reproduces_transcribed_forms(table, transcription):
    ref = parse_bilinear_forms(transcription)
    assert len(ref) == table.dim**2
    got = _tensor_map(build_forms(table, 2))
    assert {k: tuple(v) for k, v in got.items()} == ref


def test_table1_bipartite_differs_from_degen():
    assert not build_forms(TABLE1, 2).same_entries(build_forms(DEGEN, 2))


def test_rendered_complex_forms():
    t = build_forms(COMPLEX, 2)
    assert t.render_form(0) == "A1 A2 - B1 B2"
    assert t.render_form(1) == "A1 B2 + B1 A2"


@pytest.mark.parametrize("table", [COMPLEX, QUATERNION, TABLE1, DEGEN], ids=lambda t: t.name)
def test_single_site_forms_pick_components(table):
    t = build_forms(table, 1)
    for l in range(table.dim):
        assert t.entry(l) == (1, l)
        assert t.monomials(l) == [(1, (l,))]


@pytest.mark.parametrize("table", [COMPLEX, QUATERNION], ids=lambda t: t.name)
@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_associative_algebras_ignore_grouping(table, n):
    tensors = [build_forms(table, n, g) for g in enumerate_groupings(n)]
    assert all(t.same_entries(tensors[0]) for t in tensors[1:])


def test_octonion_groupings_differ():
    for table in (TABLE1, DEGEN):
        a, b = (build_forms(table, 3, g) for g in enumerate_groupings(3))
        assert not a.same_entries(b)


@pytest.mark.parametrize("table", [COMPLEX, QUATERNION, TABLE1, DEGEN], ids=lambda t: t.name)
@pytest.mark.parametrize("n", [2, 3, 4])
def test_each_form_has_dim_power_monomials(table, n):
    t = build_forms(table, n, enumerate_groupings(n)[-1])
    for s in range(table.dim):
        assert len(t.monomials(s)) == table.dim ** (n - 1)


@pytest.mark.parametrize("table", [COMPLEX, QUATERNION, TABLE1, DEGEN], ids=lambda t: t.name)
@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_forms_match_grouped_products(table, n):
    rng = np.random.default_rng(100 * n + table.dim)
    for g in enumerate_groupings(n):
        tensor = build_forms(table, n, g)
        for _ in range(20):
            vecs = rng.standard_normal((n, table.dim))
            direct = grouped_product([Hypercomplex(v) for v in vecs], g, table).coeffs
            np.testing.assert_allclose(tensor.evaluate(vecs), direct, rtol=1e-12, atol=1e-12 * np.abs(direct).max())


@pytest.mark.parametrize("table", [COMPLEX, QUATERNION, TABLE1, DEGEN], ids=lambda t: t.name)
@pytest.mark.parametrize("n", [2, 3, 5])
def test_sum_of_squared_forms_is_product_of_norms(table, n):
    rng = np.random.default_rng(7 * n + table.dim)
    for g in enumerate_groupings(n)[:5]:
        tensor = build_forms(table, n, g)
        for _ in range(20):
            vecs = rng.standard_normal((n, table.dim))
            x = tensor.evaluate(vecs)
            assert np.dot(x, x) == pytest.approx(np.prod([np.dot(v, v) for v in vecs]), rel=1e-12)


def test_build_forms_leaf_count_mismatch():
    with pytest.raises(DomainError, match="leaf count"):
        build_forms(TABLE1, 2, Grouping.left(3))


def test_text_dump():
    text = build_forms(COMPLEX, 2).to_text().splitlines()
    assert text[1:5] == ["0 0 -> +0", "0 1 -> +1", "1 0 -> +1", "1 1 -> -0"]
    assert "X0 = A1 A2 - B1 B2" in text
