import numpy as np
import pytest

from qglab.algebra import Element, LinearMap, kron, residual, tensor_algebra
from qglab.constructors import (
    bad_weights_assembly,
    drop_delta_image,
    group_function,
    matrix_fixture,
    pair_groupoid_function,
    quantum_pair_fixture,
    skewed_weight,
    with_identity_R,
    with_trivial_E,
    with_weights,
)
from qglab.groupoids import pair_groupoid
from qglab.qgroupoid import (
    Comultiplication,
    IllDefinedAction,
    check_canonical_idempotent,
    check_coassociativity,
    check_comultiplication,
    check_invariance,
    check_weight_compatibility,
    extend_to_unit,
    extended_on_E,
    verify_quantum_groupoid,
)
from qglab.weights import Weight, slice


def by_id(checks):
    return {c.id: c for c in checks}


@pytest.fixture(scope="module")
def m2():
    return matrix_fixture(2)


def test_matrix_fixture_comultiplication_is_grouplike(m2):
    A = m2.A
    for i in range(2):
        for j in range(2):
            e = A.unit(0, i, j)
            assert residual(m2.Delta(e), kron(e, e)) == 0
    checks = by_id(check_comultiplication(m2))
    assert checks["comult.weak_coassociativity"].residual == pytest.approx(0, abs=1e-15)
    assert all(c.passed for c in checks.values())


def test_matrix_fixture_density_dimensions(m2):
    checks = by_id(check_canonical_idempotent(m2))
    assert checks["canonical.density_right"].passed
    assert "Delta side 8, E side 8, joint 8" in checks["canonical.density_right"].detail


def test_trivial_E_breaks_density(m2):
    checks = by_id(check_canonical_idempotent(with_trivial_E(m2)))
    c = checks["canonical.density_right"]
    assert not c.passed and "Delta side 8, E side 16" in c.detail


def test_extension_recovers_E(m2):
    ext = extend_to_unit(m2)
    E = sum((kron(m2.A.unit(0, i, i), m2.A.unit(0, i, i)) for i in range(2)), m2.AA.zero())
    assert residual(ext, E) < 1e-12
    G = group_function(2)
    assert residual(extend_to_unit(G), G.AA.one()) < 1e-12


def test_extension_on_E_is_consistent(m2):
    for pos in (0, 1):
        _, res = extended_on_E(m2, pos)
        assert res < 1e-12


def test_extension_detects_an_inconsistent_recipe(m2):
    # Delta(e11) = 0 while Delta(e21 e11) = Delta(e21) != 0: no multiplier can act as e21
    broken = drop_delta_image(m2, index=0)
    with pytest.raises(IllDefinedAction):
        extend_to_unit(broken, m=m2.A.unit(0, 1, 0))


def test_pair_groupoid_coassociativity():
    QG = pair_groupoid_function(3)
    checks = by_id(check_coassociativity(QG))
    assert checks["coassoc.delta"].residual <= 1e-12
    assert checks["coassoc.E"].passed


def test_matrix_fixture_left_slice_lands_in_diagonal(m2):
    tr = m2.phi
    for i in range(2):
        for j in range(2):
            e = m2.A.unit(0, i, j)
            got = slice("right", tr, m2.Delta(e))
            assert residual(got, e * (1.0 if i == j else 0.0)) == 0
    assert all(c.passed for c in check_invariance(m2, "left"))


def test_function_model_left_slice_is_a_function_of_target():
    QG = pair_groupoid_function(3)
    G = pair_groupoid(3)
    rng = np.random.default_rng(0)
    f = QG.A.random(rng)
    got = slice("right", QG.phi, QG.Delta(f))
    for x in G.elements:
        want = sum(f.vec[G.index[G.mult[(x, y)]]] for y in G.elements if G.composable(x, y))
        assert got.vec[G.index[x]] == pytest.approx(want)
    # and it is constant on target fibres
    for u in G.units:
        vals = {np.round(got.vec[G.index[x]], 10) for x in G.fiber_target(u)}
        assert len(vals) == 1


def test_nu_psi_identity_on_matrix_fixture(m2):
    checks = by_id(check_weight_compatibility(m2))
    assert checks["compat.nu_psi"].residual == pytest.approx(0, abs=1e-14)
    assert checks["compat.mu_phi"].passed
    assert checks["compat.theta_nu_invariance"].passed


def test_verdicts_of_the_fixtures():
    for QG in (pair_groupoid_function(2), matrix_fixture(3), group_function(3)):
        report = verify_quantum_groupoid(QG)
        assert report.verdict, [(c.id, c.residual) for c in report.failed()]


def test_noncommutative_base_fixture():
    QG = quantum_pair_fixture(2)
    report = verify_quantum_groupoid(QG)
    assert report.verdict
    assert QG.B.block_dims == (2,)
    triple = QG.base
    assert np.linalg.norm(triple.gamma_B.matrix - QG.R.matrix) > 0.1


def test_comultiplication_strictness():
    QG = matrix_fixture(2)
    bad = QG.Delta.map.matrix.copy()
    bad[:, 1] = 0
    with pytest.raises(ValueError, match="not a \\*-homomorphism"):
        Comultiplication(QG.A, LinearMap(QG.A, QG.AA, bad))
    Comultiplication(QG.A, LinearMap(QG.A, QG.AA, bad), strict=False)


# negative controls: each defect is caught by its own check


def failed_ids(QG):
    return [c.id for c in verify_quantum_groupoid(QG).failed()]


def test_corrupted_delta(m2):
    assert "comult.full_left" in failed_ids(drop_delta_image(m2))


def test_wrong_E(m2):
    assert "canonical.density_right" in failed_ids(with_trivial_E(m2))


def test_wrong_phi(m2):
    assert "invariance.left.membership" in failed_ids(with_weights(m2, phi=skewed_weight(m2.A)))


def test_diagonal_rescaling_of_phi_is_still_invariant(m2):
    # Tr(diag(2,1) .) is left invariant for this comultiplication; only Haar normalisation rejects it
    W = Weight(m2.A, m2.A.from_blocks([np.diag([2.0, 1.0])]))
    assert all(c.passed for c in check_invariance(with_weights(m2, phi=W), "left"))


def test_wrong_psi_on_the_right(m2):
    assert "invariance.right.membership" in failed_ids(with_weights(m2, psi=skewed_weight(m2.A)))


def test_broken_R():
    ids = failed_ids(with_identity_R(quantum_pair_fixture(2)))
    assert ids[0] == "sepid.R_anti_isomorphism"


def test_noncounting_base_weight():
    report = verify_quantum_groupoid(bad_weights_assembly())
    assert not report.verdict
    assert report["sepid.solve"].residual == pytest.approx(0.25, abs=1e-10)


def test_replace_validates_shapes(m2):
    with pytest.raises(ValueError):
        m2.replace(E=Element(tensor_algebra(m2.A, m2.A, m2.A), np.zeros(64)))
