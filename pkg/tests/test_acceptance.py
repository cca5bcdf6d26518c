"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` (lines appear in the terminal
even without ``-s``) or directly with ``python3 tests/test_acceptance.py``.
"""

import sys
import time

import numpy as np
import pytest

from qglab.algebra import BlockAlgebra, Element, kron, residual, tensor_algebra
from qglab.constructors import (
    bad_weights_assembly,
    bad_weights_triple,
    break_associativity,
    convolution_algebra_model,
    disjoint_union_fixture,
    drop_delta_image,
    function_algebra_model,
    group_convolution,
    group_function,
    matrix_base_triple,
    matrix_fixture,
    pair_groupoid_function,
    quantum_pair_fixture,
    skewed_weight,
    with_identity_R,
    with_trivial_E,
    with_weights,
)
from qglab.groupoids import cyclic_group, random_groupoid, validate_groupoid
from qglab.qgroupoid import verify_quantum_groupoid
from qglab.sepid import NoSolution, build_triple, check_sepid_properties, solve_separability_idempotent
from qglab.weights import (
    Functional,
    check_gns,
    check_group_law,
    check_kms,
    generalized_cauchy_schwarz_check,
    gns,
    omegabar_margin,
    omegabar_slice_margin,
    random_weight,
)

TOL = 1e-9


def announce(capsys, number, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  criterion {number}: {detail}"
    if capsys is None:
        print(line)
    else:
        with capsys.disabled():
            print("\n" + line)
    return ok


def worst_residual(report):
    return max((c.residual for c in report.checks if c.residual is not None), default=0.0)


def fixtures():
    out = {}
    for n in (2, 3, 4):
        out[f"pair({n}) function"] = lambda n=n: pair_groupoid_function(n)
        out[f"M_{n} convolution"] = lambda n=n: matrix_fixture(n)
    for m in (2, 3):
        out[f"Z_{m} function"] = lambda m=m: group_function(m)
    out["disjoint union function"] = lambda: disjoint_union_fixture("function")
    return out


# 1 -----------------------------------------------------------------------


def criterion_1(capsys=None):
    start = time.perf_counter()
    bad = []
    worst = 0.0
    for name, make in fixtures().items():
        report = verify_quantum_groupoid(make(), tol=TOL)
        w = worst_residual(report)
        worst = max(worst, w)
        if not report.verdict or w > TOL:
            bad.append(f"{name}: {[(c.id, c.anchor) for c in report.failed()]}")
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 30.0
    detail = f"{len(fixtures())} fixtures, worst residual {worst:.2e}, {elapsed:.1f} s"
    if bad:
        detail += "; failures " + "; ".join(bad)
    return announce(capsys, 1, ok, detail)


# 2 -----------------------------------------------------------------------


def criterion_2(capsys=None):
    B, C, R, nu = matrix_base_triple(2)
    E = solve_separability_idempotent(B, C, R, nu, tol=TOL)
    expected = sum((kron(B.unit(0, i, j), B.unit(0, i, j)) for i in range(2) for j in range(2)),
                   kron(B.zero(), B.zero())) * 0.5
    dist = float(np.linalg.norm((E - expected).vec)) if isinstance(E, Element) else float("inf")
    subs = check_sepid_properties(build_triple(B, C, R, nu, E, tol=TOL), tol=TOL) if dist < 1 else []
    sub_ok = len(subs) == 12 and all(c.passed for c in subs)

    sol = solve_separability_idempotent(*bad_weights_triple(), tol=TOL)
    gap = sol.idempotency_residual if isinstance(sol, NoSolution) else float("nan")
    ok = dist <= 1e-10 and sub_ok and abs(gap - 0.25) <= 1e-10
    return announce(capsys, 2, ok, f"M_2 base |E-expected| = {dist:.2e}, {sum(c.passed for c in subs)}/12 "
                                   f"sub-checks; weights (1, 2) give NoSolution with |E^2-E| = {gap:.12f}")


# 3 -----------------------------------------------------------------------


def criterion_3(capsys=None):
    groups = {
        "Z_2 function": group_function(2),
        "Z_3 function": group_function(3),
        "Z_2 convolution": group_convolution(2),
        "Z_3 convolution": group_convolution(3),
        "Z_4 convolution": convolution_algebra_model(cyclic_group(4)),
    }
    worst, bad = 0.0, []
    for name, QG in groups.items():
        r = residual(QG.E, QG.AA.one())
        worst = max(worst, r)
        report = verify_quantum_groupoid(QG, tol=TOL)
        if QG.B.dim != 1 or r > 1e-12 or not report.verdict:
            bad.append(name)
    return announce(capsys, 3, not bad, f"{len(groups)} group fixtures, B = C, worst |E - 1(x)1| = {worst:.2e}"
                    + (f"; failures {bad}" if bad else ""))


# 4 -----------------------------------------------------------------------


def criterion_4(capsys=None, count=50):
    rng = np.random.default_rng(20240601)
    worst, bad = 0.0, []
    for k in range(count):
        dims = []
        while True:
            d = int(rng.integers(1, 4))
            if sum(x * x for x in dims) + d * d > 25:
                break
            dims.append(d)
            if rng.random() < 0.3:
                break
        W = random_weight(BlockAlgebra(tuple(dims)), rng)
        checks = list(check_kms(W, tol=TOL, samples=5, seed=k))
        checks.append(check_group_law(W, [0.4, -1.1, 0.5j, -0.5j, 0.3 + 0.2j], tol=TOL, seed=k))
        checks += check_gns(gns(W), tol=TOL)
        worst = max([worst] + [c.residual for c in checks if c.residual is not None])
        bad += [(tuple(dims), c.id) for c in checks if not c.passed]
    return announce(capsys, 4, not bad, f"{count} random weights, worst residual {worst:.2e}"
                    + (f"; failures {bad[:5]}" if bad else ""))


# 5 -----------------------------------------------------------------------


def criterion_5(capsys=None):
    from qglab.qgroupoid import check_weight_compatibility

    models = {name: make for name, make in fixtures().items()}
    models["disjoint union convolution"] = lambda: disjoint_union_fixture("convolution")
    models["Z_3 convolution"] = lambda: group_convolution(3)
    models["quantum pair (tracial)"] = lambda: quantum_pair_fixture(2, tracial=True)
    models["quantum pair (non-tracial)"] = lambda: quantum_pair_fixture(2, tracial=False)
    worst, bad = 0.0, []
    for name, make in models.items():
        checks = {c.id: c for c in check_weight_compatibility(make(), tol=TOL)}
        for cid in ("compat.nu_psi", "compat.mu_phi"):
            worst = max(worst, checks[cid].residual)
            if not checks[cid].passed:
                bad.append((name, cid))
    return announce(capsys, 5, not bad, f"{len(models)} fixtures, worst residual {worst:.2e}"
                    + (f"; failures {bad}" if bad else ""))


# 6 -----------------------------------------------------------------------


def criterion_6(capsys=None, count=30):
    rng = np.random.default_rng(7)
    bad, sizes = [], []
    for k in range(count):
        G = random_groupoid(int(rng.integers(1, 4)), int(rng.integers(1, 4)),
                            sorted({int(x) for x in rng.integers(1, 5, size=2)}), seed=k, max_size=30)
        sizes.append(len(G))
        for build in (function_algebra_model, convolution_algebra_model):
            report = verify_quantum_groupoid(build(G), tol=TOL)
            for c in report.failed():
                bad.append(f"seed {k} {build.__name__}: {c.id} [{c.anchor}]")
    ok = not bad and count >= 25 and max(sizes) <= 30
    return announce(capsys, 6, ok, f"{count} groupoids of {min(sizes)}..{max(sizes)} elements, both models"
                    + (f"; failures {bad[:5]}" if bad else ""))


# 7 -----------------------------------------------------------------------


def criterion_7(capsys=None):
    m2 = matrix_fixture(2)
    qp = quantum_pair_fixture(2)
    clean = [m2, qp, pair_groupoid_function(2), group_function(3)]
    false_positive = [not verify_quantum_groupoid(q, tol=TOL).verdict for q in clean]

    def qg_ids(QG):
        report = verify_quantum_groupoid(QG, tol=TOL)
        return report.verdict, [c.id for c in report.failed()]

    cases = {
        "corrupted Delta": (qg_ids(drop_delta_image(m2)), "comult.full_left"),
        "wrong E": (qg_ids(with_trivial_E(m2)), "canonical.density_right"),
        "wrong phi": (qg_ids(with_weights(m2, phi=skewed_weight(m2.A))), "invariance.left.membership"),
        "broken R": (qg_ids(with_identity_R(qp)), "sepid.R_anti_isomorphism"),
        "non-counting nu": (qg_ids(bad_weights_assembly()), "sepid.solve"),
    }
    g = validate_groupoid(break_associativity(cyclic_group(3)))
    cases["broken associativity"] = ((g.verdict, [c.id for c in g.failed()]), "groupoid.associativity")

    bad = [name for name, ((verdict, ids), want) in cases.items() if verdict or want not in ids]
    if any(false_positive):
        bad.append("false positive on a clean fixture")
    hits = ", ".join(f"{name} -> {want}" for name, (_, want) in cases.items())
    return announce(capsys, 7, not bad, f"{len(cases) - len([b for b in bad if b in cases])}/6 caught ({hits})"
                    + (f"; failures {bad}" if bad else ""))


# 8 -----------------------------------------------------------------------


def criterion_8(capsys=None, count=200):
    rng = np.random.default_rng(99)
    shapes = [(1, 2), (2,), (1, 1, 2), (3,), (2, 1)]
    cs_worst, om_worst = np.inf, np.inf
    for k in range(count):
        A = BlockAlgebra(shapes[k % len(shapes)])
        Bk = BlockAlgebra(shapes[(k + 2) % len(shapes)])
        T = tensor_algebra(Bk, A)
        W = random_weight(Bk, rng)
        tight = k % 4 == 0  # equality cases: y proportional to x, positive omega at 1
        x = T.random(rng)
        c = generalized_cauchy_schwarz_check(W, x, x * 2.0 if tight else T.random(rng))
        cs_worst = min(cs_worst, float(c.detail.split()[-1]))
        rep = A.random(rng)
        om = Functional(A, rep.star() @ rep if tight else rep)
        if tight:
            m = omegabar_margin(om, A.one())
        elif k % 2:
            m = omegabar_margin(om, A.random(rng))
        else:
            m = omegabar_slice_margin(om, tensor_algebra(Bk, A).random(rng))
        om_worst = min(om_worst, m)
    ok = cs_worst >= -1e-10 and om_worst >= -1e-10
    return announce(capsys, 8, ok, f"{count} Cauchy-Schwarz instances (min margin {cs_worst:.2e}), "
                                   f"{count} omegabar instances (min margin {om_worst:.2e})")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4,
            criterion_5, criterion_6, criterion_7, criterion_8]


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"criterion_{i}" for i in range(1, 9)])
def test_acceptance(criterion, capsys):
    assert criterion(capsys)


if __name__ == "__main__":
    results = [c() for c in CRITERIA]
    print(f"{sum(results)}/{len(results)} criteria pass")
    sys.exit(0 if all(results) else 1)
