import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import algebras, seeds
from qglab.algebra import (
    BlockAlgebra,
    FunctionMap,
    LinearMap,
    SubalgebraEmbedding,
    apply_on_leg,
    check_star_homomorphism,
    diagonal_algebra,
    flip,
    kron,
    leg,
    matrix_algebra,
    permute_legs,
    residual,
    slice_leg,
    span_equals,
    tensor_algebra,
)


def test_block_coordinates_are_row_major():
    A = BlockAlgebra((1, 2))
    assert A.dim == 5
    e = A.unit(1, 0, 1)
    assert np.flatnonzero(e.vec).tolist() == [2]
    assert np.allclose(e.blocks[1], [[0, 1], [0, 0]])


def test_matrix_units_multiply():
    A = matrix_algebra(3)
    assert residual(A.unit(0, 0, 1) @ A.unit(0, 1, 2), A.unit(0, 0, 2)) == 0
    assert (A.unit(0, 0, 1) @ A.unit(0, 0, 2)).norm() == 0


def test_blocks_do_not_interact():
    A = BlockAlgebra((2, 1))
    assert (A.unit(0, 0, 0) @ A.unit(1, 0, 0)).norm() == 0


def test_tensor_block_order_is_lexicographic():
    A, B = BlockAlgebra((1, 2)), BlockAlgebra((2, 1))
    T = tensor_algebra(A, B)
    assert T.block_dims == (2, 1, 4, 2)
    assert T.dim == A.dim * B.dim


def test_kron_matches_numpy_kron_inside_a_block():
    A = matrix_algebra(2)
    x, y = A.random(np.random.default_rng(0)), A.random(np.random.default_rng(1))
    assert np.allclose(kron(x, y).blocks[0], np.kron(x.blocks[0], y.blocks[0]))


def test_flip_and_permute_legs():
    A, B = matrix_algebra(2), diagonal_algebra(3)
    rng = np.random.default_rng(3)
    a, b = A.random(rng), B.random(rng)
    assert residual(flip(kron(a, b)), kron(b, a)) < 1e-14
    c = A.random(rng)
    assert residual(permute_legs(kron(a, b, c), (2, 0, 1)), kron(c, a, b)) < 1e-14


def test_leg_places_units():
    A = matrix_algebra(2)
    x = A.random(np.random.default_rng(4))
    assert residual(leg(x, 3, 1), kron(A.one(), x, A.one())) == 0


def test_slice_leg_of_nested_tensor_leg_keeps_coordinates():
    A = tensor_algebra(matrix_algebra(2), matrix_algebra(2))
    rng = np.random.default_rng(5)
    a, b = A.random(rng), A.random(rng)
    w = rng.standard_normal(A.dim)
    got = slice_leg(kron(a, b), w, 1)
    assert residual(got, a * complex(w @ b.vec)) < 1e-12


def test_apply_on_leg_agrees_with_kron():
    A = BlockAlgebra((1, 2))
    rng = np.random.default_rng(6)
    T = LinearMap(A, A, rng.standard_normal((A.dim, A.dim)))
    a, b = A.random(rng), A.random(rng)
    assert residual(apply_on_leg(kron(a, b), T, 0), kron(T(a), b)) < 1e-12
    assert residual(apply_on_leg(kron(a, b), T, 1), kron(a, T(b))) < 1e-12


def test_apply_on_leg_expands_into_target_legs():
    A = diagonal_algebra(2)
    AA = tensor_algebra(A, A)
    D = LinearMap.from_function(A, AA, lambda x: kron(x, x))
    a, b = A.basis()[0], A.basis()[1]
    out = apply_on_leg(kron(a, b), D, 0, target=tensor_algebra(A, A, A))
    assert residual(out, kron(a, a, b)) == 0


def test_linear_map_flags_are_enforced():
    A = matrix_algebra(2)
    swap = LinearMap.from_function(A, A, lambda x: x.star().star(), flags=("multiplicative", "unital"))
    assert swap.rank() == 4
    bad = LinearMap(A, A, np.zeros((4, 4)))
    with pytest.raises(ValueError):
        bad.with_flags("unital")


def test_star_homomorphism_report_detects_nonlinearity():
    A = diagonal_algebra(2)
    squash = FunctionMap(A, A, lambda x: x @ x)
    checks = {c.id: c for c in check_star_homomorphism(squash, name="sq")}
    assert not checks["sq.linear"].passed


def test_span_relations():
    A = matrix_algebra(2)
    e = A.basis()
    assert span_equals(e[:2], e[:2]).equal
    assert span_equals(e[:2], e[:1]).relation == "superset"
    assert span_equals(e[:1], e[:2]).relation == "subset"
    assert span_equals(e[:1], e[1:2]).relation == "incomparable"


def test_diagonal_embedding_into_matrices():
    B, A = diagonal_algebra(2), matrix_algebra(2)
    iota = LinearMap.from_function(B, A, lambda b: A.from_blocks([np.diag([b.vec[0], b.vec[1]])]))
    emb = SubalgebraEmbedding(B, A, iota)
    pre, dist = emb.preimage(A.unit(0, 1, 1))
    assert dist < 1e-14 and np.allclose(pre.vec, [0, 1])
    _, far = emb.preimage(A.unit(0, 0, 1))
    assert far == pytest.approx(1.0)


def test_non_embedding_is_rejected():
    B, A = diagonal_algebra(2), matrix_algebra(2)
    with pytest.raises(ValueError):
        SubalgebraEmbedding(B, A, LinearMap(B, A, np.zeros((4, 2))))


@given(algebras(), seeds)
def test_multiplication_is_associative(A, seed):
    rng = np.random.default_rng(seed)
    x, y, z = A.random(rng), A.random(rng), A.random(rng)
    assert residual((x @ y) @ z, x @ (y @ z), scale=x.norm() * y.norm() * z.norm()) < 1e-12


@given(algebras(), seeds)
def test_star_is_an_antimultiplicative_involution(A, seed):
    rng = np.random.default_rng(seed)
    x, y = A.random(rng), A.random(rng)
    assert residual((x @ y).star(), y.star() @ x.star(), scale=x.norm() * y.norm()) < 1e-12
    assert residual(x.star().star(), x) == 0


@given(algebras(max_dim=8), algebras(max_dim=8), seeds)
def test_kron_mixed_product(A, B, seed):
    rng = np.random.default_rng(seed)
    a1, a2, b1, b2 = A.random(rng), A.random(rng), B.random(rng), B.random(rng)
    lhs = kron(a1, b1) @ kron(a2, b2)
    rhs = kron(a1 @ a2, b1 @ b2)
    assert residual(lhs, rhs, scale=lhs.norm()) < 1e-12


@given(algebras(max_dim=8), algebras(max_dim=8), seeds)
def test_flip_is_a_star_homomorphism(A, B, seed):
    rng = np.random.default_rng(seed)
    T = tensor_algebra(A, B)
    x, y = T.random(rng), T.random(rng)
    assert residual(flip(x @ y), flip(x) @ flip(y), scale=x.norm() * y.norm()) < 1e-12
    assert residual(flip(flip(x)), x) == 0


@given(algebras(), st.integers(0, 5))
def test_one_is_the_unit(A, k):
    x = A.basis()[k % A.dim]
    assert residual(A.one() @ x, x) == 0 and residual(x @ A.one(), x) == 0


@given(algebras(), seeds)
def test_positive_elements_have_nonnegative_spectrum(A, seed):
    x = A.random(np.random.default_rng(seed))
    assert (x.star() @ x).min_eigenvalue() > -1e-10
