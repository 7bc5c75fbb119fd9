import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rsfcp.instances import (
    GeneralInstance,
    InstanceError,
    NormalizedInstance,
    ParseError,
    SparseNonNegMatrix,
    a_max,
    gamma_d,
    gamma_p,
    gen_random_rs,
    gen_set_cover,
    gen_vertex_cover_lp,
    parse_instance,
    serialize_instance,
)
from rsfcp.verify import exact_opt

SQUARE = [[1, 2], [3, 0]]


def test_matrix_views_agree():
    mat = SparseNonNegMatrix.from_dense([[1, 0, 2], [0, 3, 4], [5, 0, 0]])
    by_row = sorted((i, j, v) for i in range(3) for j, v in mat.row(i))
    by_col = sorted((i, j, v) for j in range(3) for i, v in mat.col(j))
    assert by_row == by_col == sorted(mat.entries())
    assert mat.nnz == 5
    assert np.all(mat.vals > 0)


def test_matrix_rejects_duplicates_and_negatives():
    with pytest.raises(InstanceError, match="duplicate"):
        SparseNonNegMatrix.from_entries(1, 1, [(0, 0, 1.0), (0, 0, 2.0)])
    with pytest.raises(InstanceError, match="negative"):
        SparseNonNegMatrix.from_entries(1, 1, [(0, 0, -1.0)])
    with pytest.raises(InstanceError, match="outside"):
        SparseNonNegMatrix.from_entries(1, 1, [(1, 0, 1.0)])


def test_zero_values_are_not_stored():
    mat = SparseNonNegMatrix.from_entries(2, 2, [(0, 0, 0.0), (1, 1, 3.0)])
    assert mat.entries() == [(1, 1, 3.0)]


@pytest.mark.parametrize(
    "dense, gp, gd, am",
    [
        ([[1]], 1.0, 1.0, 1.0),
        (SQUARE, 4.0, 3.0, 3.0),
        ([[2]], 2.0, 2.0, 2.0),
    ],
)
def test_width_statistics(dense, gp, gd, am):
    inst = NormalizedInstance.from_dense(dense)
    assert gamma_p(inst) == inst.gamma_p == gp
    assert gamma_d(inst) == inst.gamma_d == gd
    assert a_max(inst) == inst.a_max == am


def test_a_max_of_entry_free_matrix_is_one():
    inst = NormalizedInstance(SparseNonNegMatrix.from_entries(0, 3, []))
    assert a_max(inst) == 1.0
    assert inst.empty_columns == [0, 1, 2]


def test_normalized_rejects_small_entries_and_empty_rows():
    with pytest.raises(InstanceError, match="below 1"):
        NormalizedInstance.from_dense([[0.5]])
    with pytest.raises(InstanceError, match="infeasible"):
        NormalizedInstance.from_dense([[1, 0], [0, 0]])


def test_empty_columns_allowed():
    inst = NormalizedInstance.from_dense([[1, 0]])
    assert inst.empty_columns == [1]


def test_parse_normalized():
    inst = parse_instance("fcp normalized 1 1\n0 0 2\n")
    assert isinstance(inst, NormalizedInstance)
    assert inst.matrix.to_dense().tolist() == [[2.0]]


def test_parse_general_with_comments():
    text = "# header\nfcp general 2 2\nb 1 2  # rhs\nc 3 4\n0 0 1.5\n1 1 0.25\n"
    g = parse_instance(text)
    assert isinstance(g, GeneralInstance)
    assert g.b.tolist() == [1.0, 2.0]
    assert g.c.tolist() == [3.0, 4.0]
    assert g.matrix.to_dense().tolist() == [[1.5, 0.0], [0.0, 0.25]]


@pytest.mark.parametrize(
    "text, message, lineno",
    [
        ("fcp normalized 1 1\n0 0 -1\n", "negative entry", 2),
        ("fcp normalized 1 1\n0 0 1\n0 0 2\n", "duplicate entry", 3),
        ("fcp normalized 1 1\n0 1 1\n", "dimension mismatch", 2),
        ("fcp normalized 1 1\n0 0\n", "malformed", 2),
        ("fcp normalized 1 1\n0 0 0.5\n", r"in \(0, 1\)", 2),
        ("fcp general 2 1\nb 1\nc 1\n", "dimension mismatch", 2),
        ("lp normalized 1 1\n", "header", 1),
        ("fcp normalized 1 1\n0 0 abc\n", "not a number", 2),
    ],
)
def test_parse_errors_carry_line_numbers(text, message, lineno):
    with pytest.raises(ParseError, match=message) as info:
        parse_instance(text)
    assert info.value.lineno == lineno


def test_roundtrip_unit():
    inst = NormalizedInstance.from_dense([[2]])
    assert parse_instance(serialize_instance(inst)) == inst


def test_serialize_empty_is_header_only():
    inst = NormalizedInstance(SparseNonNegMatrix.from_entries(0, 0, []))
    assert serialize_instance(inst) == "fcp normalized 0 0\n"
    assert parse_instance(serialize_instance(inst)) == inst


def test_roundtrip_random_10x10():
    inst = gen_random_rs(10, 10, 3, 4.0, seed=11)
    text = serialize_instance(inst)
    again = parse_instance(text)
    assert again == inst
    assert serialize_instance(again) == text


@settings(max_examples=60, deadline=None)
@given(
    n=st.integers(1, 12),
    m=st.integers(1, 12),
    data=st.data(),
)
def test_roundtrip_property(n, m, data):
    k = data.draw(st.integers(1, m))
    amax = data.draw(st.floats(1.0, 50.0))
    seed = data.draw(st.integers(0, 2**32 - 1))
    inst = gen_random_rs(n, m, k, amax, seed)
    assert parse_instance(serialize_instance(inst)) == inst


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.integers(1, 8), st.data())
def test_roundtrip_general_property(n, m, data):
    vals = st.floats(0.0, 1e6, allow_nan=False, allow_infinity=False)
    b = data.draw(st.lists(vals, min_size=n, max_size=n))
    c = data.draw(st.lists(vals, min_size=m, max_size=m))
    cells = data.draw(st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, m - 1))))
    entries = [(i, j, data.draw(st.floats(1e-9, 1e9))) for i, j in sorted(cells)]
    g = GeneralInstance(SparseNonNegMatrix.from_entries(n, m, entries), np.array(b), np.array(c))
    assert parse_instance(serialize_instance(g)) == g


def test_gen_random_rs_forced_shape():
    inst = gen_random_rs(1, 1, 1, 1.0, seed=123)
    assert inst.matrix.to_dense().tolist() == [[1.0]]


def test_gen_random_rs_is_deterministic():
    assert gen_random_rs(20, 15, 3, 4.0, 5) == gen_random_rs(20, 15, 3, 4.0, 5)
    assert gen_random_rs(20, 15, 3, 4.0, 5) != gen_random_rs(20, 15, 3, 4.0, 6)


def test_gen_random_rs_shape_properties():
    inst = gen_random_rs(50, 50, 3, 4.0, seed=7)
    counts = inst.matrix.row_counts()
    assert counts.min() >= 1 and counts.max() <= 3
    assert inst.matrix.vals.min() >= 1.0 and inst.matrix.vals.max() <= 4.0


@pytest.mark.parametrize("args", [(0, 1, 1, 1.0), (1, 0, 1, 1.0), (2, 2, 3, 1.0), (2, 2, 0, 1.0), (2, 2, 1, 0.5)])
def test_gen_random_rs_rejects_bad_parameters(args):
    with pytest.raises(InstanceError):
        gen_random_rs(*args, seed=0)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 30), st.integers(1, 30), st.data())
def test_generated_instance_invariants(n, m, data):
    k = data.draw(st.integers(1, min(m, 6)))
    amax = data.draw(st.floats(1.0, 8.0))
    inst = gen_random_rs(n, m, k, amax, data.draw(st.integers(0, 10**6)))
    assert inst.matrix.vals.min() >= 1.0
    assert inst.gamma_p >= inst.a_max
    assert inst.gamma_d >= inst.a_max
    assert inst.gamma_d <= k * inst.a_max * (1 + 1e-12)
    assert inst.sparsity <= k


def test_vertex_cover_single_edge():
    inst = gen_vertex_cover_lp([(0, 1)])
    assert inst.matrix.to_dense().tolist() == [[1.0, 1.0]]
    assert inst.sparsity == 2 and inst.a_max == 1.0


def test_vertex_cover_triangle():
    dense = gen_vertex_cover_lp([(0, 1), (1, 2), (0, 2)]).matrix.to_dense()
    assert dense.shape == (3, 3)
    assert dense.sum(axis=1).tolist() == [2.0, 2.0, 2.0]
    assert set(np.unique(dense)) == {0.0, 1.0}


def test_vertex_cover_path_optimum():
    assert exact_opt(gen_vertex_cover_lp([(0, 1), (1, 2)])) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("edges, message", [([(0, 0)], "self-loop"), ([(0, 1), (1, 0)], "duplicate")])
def test_vertex_cover_rejects_non_simple(edges, message):
    with pytest.raises(InstanceError, match=message):
        gen_vertex_cover_lp(edges)


def test_set_cover_instances():
    assert gen_set_cover(1, [[0]]).matrix.to_dense().tolist() == [[1.0]]
    dense = gen_set_cover(2, [[0], [1], [0, 1]]).matrix.to_dense()
    assert dense.tolist() == [[1.0, 0.0, 1.0], [0.0, 1.0, 1.0]]
    with pytest.raises(InstanceError, match="element 1"):
        gen_set_cover(2, [[0]])


def test_instances_are_read_only():
    inst = gen_random_rs(4, 4, 2, 3.0, 1)
    with pytest.raises(ValueError):
        inst.matrix.vals[0] = 5.0
    with pytest.raises(AttributeError):
        inst.gamma_p = 3.0
