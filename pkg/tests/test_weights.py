import numpy as np
import pytest
from hypothesis import given

from conftest import algebras, seeds
from qglab.algebra import BlockAlgebra, diagonal_algebra, kron, matrix_algebra, residual, tensor_algebra
from qglab.weights import (
    Functional,
    Weight,
    check_gns,
    check_group_law,
    check_kms,
    functional_abs,
    generalized_cauchy_schwarz_check,
    gns,
    omegabar_margin,
    omegabar_slice_margin,
    random_weight,
    slice,
    tensor_weight,
)


def diag_weight(*lam):
    A = matrix_algebra(len(lam))
    return Weight(A, A.from_blocks([np.diag(lam)]))


def test_weight_pairs_with_density():
    W = diag_weight(2.0, 1.0)
    A = W.algebra
    assert W(A.one()) == pytest.approx(3.0)
    assert W(A.unit(0, 0, 1)) == 0
    x = A.random(np.random.default_rng(0))
    assert W(x) == pytest.approx(np.trace(W.density.blocks[0] @ x.blocks[0]))


def test_nonfaithful_or_nonhermitian_densities_are_rejected():
    A = matrix_algebra(2)
    with pytest.raises(ValueError, match="positive definite"):
        Weight(A, A.from_blocks([np.diag([1.0, 0.0])]))
    with pytest.raises(ValueError, match="Hermitian"):
        Weight(A, A.from_blocks([[[1.0, 1.0], [0.0, 1.0]]]))


def test_sigma_on_matrix_unit_is_a_phase():
    W = diag_weight(3.0, 1.0)
    e12 = W.algebra.unit(0, 0, 1)
    for t in (0.7, -1.3):
        assert residual(W.sigma(t, e12), e12 * (3.0 ** (1j * t))) < 1e-13
    # analytic continuation: sigma_{-i}(e12) = rho e12 rho^{-1} = 3 e12
    assert residual(W.sigma(-1j, e12), e12 * 3.0) < 1e-13


def test_trace_is_tracial_and_sigma_trivial():
    A = BlockAlgebra((1, 3))
    W = Weight.trace(A, 2.0)
    assert W.is_tracial
    x = A.random(np.random.default_rng(1))
    assert residual(W.sigma(0.4, x), x) < 1e-13
    assert not diag_weight(2.0, 1.0).is_tracial


def test_functional_norm_and_absolute_value():
    A = matrix_algebra(2)
    om = Functional(A, A.unit(0, 0, 1))
    assert om(A.unit(0, 1, 0)) == 1
    assert om.norm() == pytest.approx(1.0)
    ab = functional_abs(om)
    assert residual(ab.rep, A.unit(0, 0, 0)) < 1e-14
    assert ab.norm() == pytest.approx(om.norm())
    # the defining inequality at a = e21 (the element where om attains its norm)
    assert omegabar_margin(om, A.unit(0, 1, 0)) >= -1e-12


def test_kms_checks_pass_for_the_right_modular_group():
    W = random_weight(BlockAlgebra((1, 2, 3)), np.random.default_rng(2))
    assert all(c.passed for c in check_kms(W))


def test_kms_checks_fail_for_a_wrong_modular_group():
    W = diag_weight(3.0, 1.0)
    wrong = diag_weight(1.0, 3.0)
    checks = {c.id: c for c in check_kms(W, modular=wrong)}
    assert not checks["kms.psi.identity"].passed
    assert not checks["kms.psi.swap"].passed


def test_group_law_including_imaginary_parameters():
    W = random_weight(BlockAlgebra((2, 2)), np.random.default_rng(3))
    assert check_group_law(W, [0.3, -1.0, 0.5j, -1j, 0.2 + 0.1j]).passed


def test_gns_relations():
    W = random_weight(BlockAlgebra((1, 3)), np.random.default_rng(4))
    checks = check_gns(gns(W), samples=3)
    assert [c.id for c in checks if not c.passed] == []
    assert len(checks) == 7


def test_gns_inner_product_matches_weight():
    W = diag_weight(2.0, 0.5)
    G = gns(W)
    A = W.algebra
    a, b = A.unit(0, 0, 1), A.unit(0, 0, 1)
    # <Lambda(e12), Lambda(e12)> = psi(e21 e12) = psi(e22) = 0.5
    assert G.inner(G.lam(a), G.lam(b)) == pytest.approx(0.5)


def test_slices_of_tensor_weights():
    A, B = matrix_algebra(2), diagonal_algebra(2)
    WA, WB = diag_weight(2.0, 1.0), Weight(B, B.from_blocks([[[1.0]], [[3.0]]]))
    rng = np.random.default_rng(5)
    a, b = A.random(rng), B.random(rng)
    assert residual(slice("left", WA, kron(a, b)), b * WA(a)) < 1e-13
    assert residual(slice("right", WB, kron(a, b)), a * WB(b)) < 1e-13
    T = tensor_weight(WA, WB)
    assert T(kron(a, b)) == pytest.approx(WA(a) * WB(b))


def test_slice_rejects_a_mismatched_functional():
    A, B = matrix_algebra(2), diagonal_algebra(2)
    with pytest.raises(ValueError, match="factor mismatch"):
        slice("left", Weight.trace(B), kron(A.one(), B.one()))


@given(algebras(), seeds)
def test_random_weight_satisfies_kms(A, seed):
    W = random_weight(A, np.random.default_rng(seed))
    assert all(c.passed for c in check_kms(W, samples=5, seed=seed))


@given(algebras(max_dim=12), seeds)
def test_gns_property(A, seed):
    W = random_weight(A, np.random.default_rng(seed))
    assert all(c.passed for c in check_gns(gns(W), t_samples=(1.0, -0.5)))


@given(algebras(), seeds)
def test_omegabar_inequality(A, seed):
    rng = np.random.default_rng(seed)
    om = Functional(A, A.random(rng))
    assert omegabar_margin(om, A.random(rng)) >= -1e-10 * max(1.0, om.norm())


@given(algebras(max_dim=6), algebras(max_dim=6), seeds)
def test_omegabar_slice_and_cauchy_schwarz(A, B, seed):
    rng = np.random.default_rng(seed)
    T = tensor_algebra(B, A)
    om = Functional(A, A.random(rng))
    z = T.random(rng)
    assert omegabar_slice_margin(om, z) >= -1e-10 * max(1.0, om.norm() * z.norm() ** 2)
    W = random_weight(B, rng)
    assert generalized_cauchy_schwarz_check(W, T.random(rng), T.random(rng)).passed
