import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import seeds
from qglab.algebra import (
    BlockAlgebra,
    Element,
    LinearMap,
    diagonal_algebra,
    flip,
    kron,
    matrix_algebra,
    residual,
    tensor_map,
)
from qglab.constructors import bad_weights_triple, matrix_base_triple, nontracial_base
from qglab.sepid import (
    NoSolution,
    build_triple,
    check_R,
    check_sepid_properties,
    solve_separability_idempotent,
    solve_with_diagnostics,
    transported_weight,
    transpose_map,
    verify_separability,
)
from qglab.weights import Weight, slice


def matrix_base_expected(n=2):
    B = matrix_algebra(n)
    return sum((kron(B.unit(0, i, j), B.unit(0, i, j)) for i in range(n) for j in range(n)),
               kron(B.zero(), B.zero())) * (1.0 / n)


def test_matrix_base_idempotent_value():
    B, C, R, nu = matrix_base_triple(2)
    E = solve_separability_idempotent(B, C, R, nu)
    assert isinstance(E, Element)
    assert np.linalg.norm((E - matrix_base_expected()).vec) <= 1e-10


def test_matrix_base_defining_identities():
    B, C, R, nu = matrix_base_triple(2)
    E = solve_separability_idempotent(B, C, R, nu)
    assert residual(slice("left", nu, E), C.one()) < 1e-12
    T = build_triple(B, C, R, nu, E)
    # nu has scalar density, so gamma_B = R and mu = nu o R^-1 = 2 Tr
    assert np.allclose(T.gamma_B.matrix, R.matrix, atol=1e-12)
    assert residual(T.mu.density, C.one() * 2.0) < 1e-12
    # (R^-1 (x) R)(flip E) = E
    assert residual(tensor_map(R.inverse(), R)(flip(E)), E) < 1e-12


def test_matrix_base_all_subchecks_pass():
    B, C, R, nu = matrix_base_triple(2)
    T = build_triple(B, C, R, nu, solve_separability_idempotent(B, C, R, nu))
    checks = check_sepid_properties(T, tol=1e-10)
    assert len(checks) == 12
    assert [c.id for c in checks if not c.passed] == []
    assert {c.id.split(".")[1] for c in checks} == set("abcdefghijkl")


def test_bad_weights_have_no_solution():
    B, C, R, nu = bad_weights_triple()
    sol = solve_separability_idempotent(B, C, R, nu)
    assert isinstance(sol, NoSolution) and not sol
    assert sol.idempotency_residual == pytest.approx(0.25, abs=1e-10)
    assert sol.nullity == 0
    assert "0.25" in sol.explain()


def test_commutative_counting_base():
    B = diagonal_algebra(3)
    E = solve_separability_idempotent(B, B, LinearMap.identity(B), Weight.trace(B))
    expected = sum((kron(b, b) for b in B.basis()), kron(B.zero(), B.zero()))
    assert residual(E, expected) < 1e-12


def test_nontracial_bases_need_unit_inverse_trace():
    B = matrix_algebra(2)
    R = transpose_map(B)
    good = Weight(B, B.from_blocks([np.diag([3.0, 1.5])]))
    bad = Weight(B, B.from_blocks([np.diag([2.0, 1.0])]))
    assert isinstance(solve_separability_idempotent(B, B, R, good), Element)
    assert isinstance(solve_separability_idempotent(B, B, R, bad), NoSolution)


def test_nontracial_triple_has_nontrivial_gamma():
    B, nu = nontracial_base(2)
    R = transpose_map(B)
    checks, T = verify_separability(B, B, R, nu)
    assert [c.id for c in checks if not c.passed] == []
    assert np.linalg.norm(T.gamma_B.matrix - R.matrix) > 0.1


def test_identity_R_on_matrices_is_not_anti_multiplicative():
    B = matrix_algebra(2)
    c = check_R(LinearMap.identity(B))
    assert not c.passed and "anti_multiplicative" in c.detail
    checks, T = verify_separability(B, B, LinearMap.identity(B), Weight.trace(B, 2.0))
    failed = [x.id for x in checks if not x.passed]
    assert failed[0] == "sepid.R_anti_isomorphism"


def test_mu_transport():
    B, C, R, nu = matrix_base_triple(3)
    mu = transported_weight(nu, R)
    x = C.random(np.random.default_rng(0))
    assert mu(x) == pytest.approx(nu(R.inverse()(x)))


def test_solver_reports_rank():
    B, C, R, nu = matrix_base_triple(2)
    info = solve_with_diagnostics(B, C, R, nu)
    assert info.solved and info.rank == B.dim and info.nullity == 0


@st.composite
def admissible_bases(draw):
    """Block algebras with per-block densities satisfying tr(rho_k^-1) = 1."""
    dims = tuple(draw(st.lists(st.integers(1, 3), min_size=1, max_size=3)))
    seed = draw(seeds)
    rng = np.random.default_rng(seed)
    B = BlockAlgebra(dims)
    blocks = []
    for d in dims:
        lam = np.exp(rng.uniform(-1, 1, d))
        lam = lam * np.sum(1.0 / lam)
        z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        q, _ = np.linalg.qr(z)
        blocks.append((q * lam) @ q.conj().T)
    return B, Weight(B, B.from_blocks(blocks))


@given(admissible_bases())
def test_random_admissible_bases_give_valid_triples(data):
    B, nu = data
    checks, T = verify_separability(B, B, transpose_map(B), nu)
    assert T is not None
    assert [c.id for c in checks if not c.passed] == []


@given(admissible_bases(), st.floats(1.2, 3.0))
def test_rescaled_weights_have_no_solution(data, factor):
    B, nu = data
    scaled = Weight(B, nu.density * factor)
    assert isinstance(solve_separability_idempotent(B, B, transpose_map(B), scaled), NoSolution)
