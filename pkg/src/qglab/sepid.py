"""Separability idempotents: solving for E and checking its gamma-map calculus.

Given a base algebra B, a second algebra C, a *-anti-isomorphism R: B -> C and
a faithful weight nu on B, the idempotent E in B (x) C is pinned down by the
linear equations

    (nu (x) id)(E (b (x) 1)) = gamma_B(b)  for all b,     (nu (x) id)(E) = 1,

with gamma_B = R o sigma^nu_{i/2}.  Self-adjointness and idempotency are then
tested on the unique solution.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .algebra import (
    DEFAULT_TOL,
    BlockAlgebra,
    Element,
    LinearMap,
    check_star_homomorphism,
    flip,
    kron,
    matrix_rank,
    residual,
    slice_leg,
    tensor_algebra,
    tensor_map,
)
from .report import Check, undefined
from .weights import Weight, check_kms

SIGMA_T = (1.0, -1.0, 0.5, -0.5, 0.25)


class TripleError(ValueError):
    """The data do not form a separability triple."""


@dataclass(frozen=True, eq=False)
class NoSolution:
    """The linear system was solved but its solution is not a self-adjoint idempotent."""

    candidate: Element
    idempotency_residual: float
    selfadjoint_residual: float
    linear_residual: float
    rank: int
    nullity: int
    reason: str = ""

    def explain(self) -> str:
        return (f"no separability idempotent: {self.reason or 'candidate fails the projection test'}; "
                f"||E^2-E|| = {self.idempotency_residual:.6g}, ||E-E*|| = {self.selfadjoint_residual:.6g}, "
                f"linear residual {self.linear_residual:.3g}, rank {self.rank}, nullity {self.nullity}")

    def __bool__(self):
        return False


@dataclass(frozen=True, eq=False)
class SolveInfo:
    result: Element | NoSolution
    candidate: Element
    rank: int
    nullity: int
    linear_residual: float
    idempotency_residual: float
    selfadjoint_residual: float

    @property
    def solved(self) -> bool:
        return isinstance(self.result, Element)


def gamma_B_map(R: LinearMap, nu: Weight) -> LinearMap:
    return R @ nu.sigma_map(0.5j)


def transported_weight(nu: Weight, R: LinearMap) -> Weight:
    """mu = nu o R^{-1}."""
    w = nu.vector @ np.linalg.inv(R.matrix)
    return Weight.from_vector(R.codomain, w)


def _projection_residuals(E: Element) -> tuple[float, float]:
    return float(np.linalg.norm((E @ E - E).vec)), float(np.linalg.norm((E - E.star()).vec))


def _linear_system(B: BlockAlgebra, C: BlockAlgebra, R: LinearMap, nu: Weight):
    basis = B.basis()
    # N[k, a] = nu(e_a b_k): (nu (x) id)(E(b_k (x) 1)) = sum_a N[k, a] F[a, :]
    N = np.array([[nu(ea @ bk) for ea in basis] for bk in basis])
    gamma = gamma_B_map(R, nu).matrix.T
    M = np.vstack([N, nu.vector[None, :]])
    rhs = np.vstack([gamma, C.one().vec[None, :]])
    return M, rhs


def _null_space(M: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    _, s, vh = np.linalg.svd(M)
    r = int(np.sum(s > rtol * s[0])) if s.size and s[0] > 0 else 0
    return vh[r:].conj().T


def _sweep(F0: np.ndarray, K: np.ndarray, alg: BlockAlgebra, seed: int, grid: int = 9,
           samples: int = 400) -> np.ndarray:
    """Best projection candidate in the affine family F0 + K Y."""
    r, m = K.shape[1], F0.shape[1]
    nparam = r * m
    if nparam <= 3:
        pts = itertools.product(np.linspace(-2, 2, grid), repeat=nparam)
    else:
        rng = np.random.default_rng(seed)
        pts = rng.uniform(-2, 2, size=(samples, nparam))
    best, best_res = F0, np.inf
    for p in pts:
        F = F0 + K @ np.reshape(np.asarray(p, dtype=complex), (r, m))
        E = alg.from_factor_tensor(F)
        res = sum(_projection_residuals(E))
        if res < best_res:
            best, best_res = F, res
    return best


def solve_with_diagnostics(B: BlockAlgebra, C: BlockAlgebra, R: LinearMap, nu: Weight,
                           tol: float = DEFAULT_TOL, seed: int = 0) -> SolveInfo:
    if R.domain != B or R.codomain != C:
        raise ValueError("R must map B -> C")
    if nu.algebra != B:
        raise ValueError("nu must be a weight on B")
    alg = tensor_algebra(B, C)
    M, rhs = _linear_system(B, C, R, nu)
    rank = matrix_rank(M)
    nullity = (B.dim - rank) * C.dim
    F, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    if nullity:
        F = _sweep(F, _null_space(M), alg, seed)
    lin = float(np.linalg.norm(M @ F - rhs)) / max(1.0, float(np.linalg.norm(rhs)))
    E = alg.from_factor_tensor(F)
    idem, sa = _projection_residuals(E)
    scale = max(1.0, E.norm())
    ok = idem / scale <= tol and sa / scale <= tol and lin <= tol
    if ok:
        result: Element | NoSolution = E
    else:
        if lin > tol:
            reason = "the defining linear equations are inconsistent"
        elif nullity:
            reason = f"rank-deficient system (nullity {nullity}); no projection found in the solution space"
        else:
            reason = "the unique solution of the linear equations is not a self-adjoint idempotent"
        result = NoSolution(E, idem, sa, lin, rank, nullity, reason)
    return SolveInfo(result, E, rank, nullity, lin, idem, sa)


def solve_separability_idempotent(B: BlockAlgebra, C: BlockAlgebra, R: LinearMap, nu: Weight,
                                  tol: float = DEFAULT_TOL, seed: int = 0) -> Element | NoSolution:
    return solve_with_diagnostics(B, C, R, nu, tol, seed).result


def transpose_map(B: BlockAlgebra) -> LinearMap:
    """Blockwise transpose, a *-anti-automorphism of B."""
    perm = np.empty(B.dim, dtype=int)
    for _, idx in B.groups:
        perm[idx] = idx.transpose(0, 2, 1)
    mat = np.eye(B.dim, dtype=complex)[perm]
    return LinearMap(B, B, mat)


# --------------------------------------------------------------------------
# the triple


def _map_distance(S: LinearMap, T: LinearMap) -> float:
    return float(np.linalg.norm(S.matrix - T.matrix)) / max(1.0, float(np.linalg.norm(T.matrix)))


def def22_residuals(B, C, R, nu: Weight, E: Element) -> dict[str, float]:
    """Residuals of the defining conditions of a separability idempotent."""
    gB = gamma_B_map(R, nu)
    unit = residual(slice_leg(E, nu.vector, 0), C.one())
    eq2 = 0.0
    for b in B.basis():
        lhs = slice_leg(E @ kron(b, C.one()), nu.vector, 0)
        eq2 = max(eq2, residual(lhs, gB(b)))
    idem, sa = _projection_residuals(E)
    scale = max(1.0, E.norm())
    return {"unit": unit, "gamma": eq2, "idempotent": idem / scale, "selfadjoint": sa / scale}


@dataclass(frozen=True, eq=False)
class SeparabilityTriple:
    B: BlockAlgebra
    C: BlockAlgebra
    R: LinearMap
    nu: Weight
    E: Element
    mu: Weight
    gamma_B: LinearMap
    gamma_C: LinearMap
    tol: float = DEFAULT_TOL
    formula_residuals: dict = field(default_factory=dict)

    @property
    def algebra(self) -> BlockAlgebra:
        return self.E.algebra

    @property
    def R_inv(self) -> LinearMap:
        return self.R.inverse()

    @property
    def gamma_B_inv(self) -> LinearMap:
        return self.gamma_B.inverse()

    @property
    def gamma_C_inv(self) -> LinearMap:
        return self.gamma_C.inverse()

    def mirrored(self) -> tuple[BlockAlgebra, BlockAlgebra, LinearMap, Weight]:
        """(C, B, R^{-1}, mu): the data whose idempotent should be the flip of E."""
        return self.C, self.B, self.R_inv, self.mu


def build_triple(B: BlockAlgebra, C: BlockAlgebra, R: LinearMap, nu: Weight, E: Element,
                 tol: float = DEFAULT_TOL) -> SeparabilityTriple:
    if E.algebra != tensor_algebra(B, C):
        raise TripleError("E must live in B (x) C")
    try:
        R.with_flags("anti_multiplicative", "star_preserving", "unital", "injective")
    except ValueError as exc:
        raise TripleError(f"R is not a *-anti-isomorphism: {exc}") from None
    if B.dim != C.dim:
        raise TripleError("R cannot be bijective: dim B != dim C")
    bad = {k: v for k, v in def22_residuals(B, C, R, nu, E).items() if v > tol}
    if bad:
        raise TripleError(f"E fails the separability conditions: {bad}")

    mu = transported_weight(nu, R)
    R_inv = R.inverse()
    try:
        gB = gamma_B_map(R, nu).with_flags("anti_multiplicative")
        gC = (R_inv @ mu.sigma_map(-0.5j)).with_flags("anti_multiplicative")
    except ValueError as exc:
        raise TripleError(f"gamma maps are not anti-multiplicative: {exc}") from None

    forms = {
        "gamma_B": _map_distance(mu.sigma_map(-0.5j) @ R, gB),
        "gamma_C": _map_distance(nu.sigma_map(0.5j) @ R_inv, gC),
        "gamma_B_inv": max(_map_distance(nu.sigma_map(-0.5j) @ R_inv, gB.inverse()),
                           _map_distance(R_inv @ mu.sigma_map(0.5j), gB.inverse())),
        "gamma_C_inv": max(_map_distance(mu.sigma_map(0.5j) @ R, gC.inverse()),
                           _map_distance(R @ nu.sigma_map(-0.5j), gC.inverse())),
        "sigma_mu": max(_map_distance(mu.sigma_map(t), R @ nu.sigma_map(-t) @ R_inv) for t in SIGMA_T),
    }
    wm, wn = mu.vector, nu.vector
    forms["mu"] = max(float(np.linalg.norm(wn @ M - wm)) for M in (R_inv.matrix, gC.matrix, gB.inverse().matrix)) \
        / max(1.0, float(np.linalg.norm(wm)))
    forms["nu"] = max(float(np.linalg.norm(wm @ M - wn)) for M in (R.matrix, gB.matrix, gC.inverse().matrix)) \
        / max(1.0, float(np.linalg.norm(wn)))
    bad = {k: v for k, v in forms.items() if v > tol}
    if bad:
        raise TripleError(f"gamma/mu formulas disagree: {bad}")
    return SeparabilityTriple(B, C, R, nu, E, mu, gB, gC, tol, forms)


# --------------------------------------------------------------------------
# property checks


def _leg_rank(tensors: list[np.ndarray], axis: int) -> int:
    """Dimension of the span of slices of the given factor tensors along a leg."""
    if axis == 0:  # (id (x) omega) images: columns
        m = np.hstack(tensors)
    else:  # (theta (x) id) images: rows
        m = np.vstack(tensors).T
    return matrix_rank(m)


def check_sepid_properties(T: SeparabilityTriple, tol: float | None = None,
                           t_samples: Sequence[float] = SIGMA_T) -> list[Check]:
    tol = T.tol if tol is None else tol
    B, C, E = T.B, T.C, T.E
    one_B, one_C = B.one(), C.one()
    gB, gC, gBi, gCi = T.gamma_B, T.gamma_C, T.gamma_B_inv, T.gamma_C_inv
    bB, bC = B.basis(), C.basis()
    out = []

    def worst(pairs):
        return max((residual(x, y) for x, y in pairs), default=0.0)

    a = worst((E @ kron(b, one_C), E @ kron(one_B, gB(b))) for b in bB)
    out.append(Check("sepid.a.gamma_B_right", "E(b(x)1) = E(1(x)gamma_B(b))", a, tol))

    b_ = worst((E @ kron(one_B, c), E @ kron(gBi(c), one_C)) for c in bC)
    out.append(Check("sepid.b.gamma_B_inverse", "E(1(x)c) = E(gamma_B^{-1}(c)(x)1)", b_, tol))

    c_ = residual(slice_leg(E, T.mu.vector, 1), one_B)
    out.append(Check("sepid.c.mu_slice_unit", "(id(x)mu)(E) = 1", c_, tol))

    d = max(worst((kron(one_B, c) @ E, kron(gC(c), one_C) @ E) for c in bC),
            worst((kron(b, one_C) @ E, kron(one_B, gCi(b)) @ E) for b in bB))
    out.append(Check("sepid.d.gamma_C_left", "(1(x)c)E = (gamma_C(c)(x)1)E and (b(x)1)E = (1(x)gamma_C^{-1}(b))E",
                     d, tol))

    e = worst((slice_leg(kron(one_B, c) @ E, T.mu.vector, 1), gC(c)) for c in bC)
    out.append(Check("sepid.e.mu_slice_gamma_C", "(id(x)mu)((1(x)c)E) = gamma_C(c)", e, tol))

    f = max(worst((gC(gB(b).star()).star(), b) for b in bB), worst((gB(gC(c).star()).star(), c) for c in bC))
    out.append(Check("sepid.f.gamma_star", "gamma_C(gamma_B(b)*)* = b and gamma_B(gamma_C(c)*)* = c", f, tol))

    # fullness: legs of E generate C, C, B, B
    left_b = [(E @ kron(b, one_C)).factor_tensor() for b in bB]
    right_b = [(kron(b, one_C) @ E).factor_tensor() for b in bB]
    left_c = [(kron(one_B, c) @ E).factor_tensor() for c in bC]
    right_c = [(E @ kron(one_B, c)).factor_tensor() for c in bC]
    spans = [_leg_rank(left_b, 1), _leg_rank(right_b, 1), _leg_rank(left_c, 0), _leg_rank(right_c, 0)]
    targets = [C.dim, C.dim, B.dim, B.dim]
    g = float(sum(t - s for s, t in zip(spans, targets)))
    out.append(Check("sepid.g.fullness", "E is full: its legs span C and B", g, tol,
                     detail=f"span dims {spans} vs {targets}"))

    def nullity(elems, dim):
        return dim - matrix_rank(np.stack([x.vec for x in elems], axis=1))

    kernels = [nullity([kron(one_B, c) @ E for c in bC], C.dim), nullity([E @ kron(one_B, c) for c in bC], C.dim),
               nullity([E @ kron(b, one_C) for b in bB], B.dim), nullity([kron(b, one_C) @ E for b in bB], B.dim)]
    out.append(Check("sepid.h.injectivity", "multiplication by E is injective on B and C", float(sum(kernels)), tol,
                     detail=f"kernel dims {kernels}"))

    i_ = max(_map_distance(gB @ gC, T.mu.sigma_map(-1j)), _map_distance(gBi @ gCi, T.nu.sigma_map(-1j)))
    out.append(Check("sepid.i.modular_generator", "sigma^mu_{-i} = gamma_B o gamma_C, sigma^nu_{-i} = "
                     "gamma_B^{-1} o gamma_C^{-1}", i_, tol))

    j = max(residual(tensor_map(T.nu.sigma_map(t), T.mu.sigma_map(-t))(E), E) for t in t_samples)
    out.append(Check("sepid.j.sigma_invariance", "(sigma^nu_t (x) sigma^mu_{-t})(E) = E", j, tol))

    sE = flip(E)
    k = max(residual(tensor_map(gC, gB)(sE), E), residual(tensor_map(gB, gC)(E), sE),
            residual(tensor_map(T.R_inv, T.R)(sE), E), residual(tensor_map(T.R, T.R_inv)(E), sE))
    out.append(Check("sepid.k.flip", "(gamma_C(x)gamma_B)(sigma E) = E and (R^{-1}(x)R)(sigma E) = E", k, tol))

    GG = tensor_map(gC, gB)
    l_ = 0.0
    for b in bB:
        for c in bC:
            u = gCi(b)
            v = gBi(c)
            l_ = max(l_,
                     residual(GG(kron(u, v) @ sE), E @ kron(b, c)),
                     residual(GG(sE @ kron(u, v)), kron(b, c) @ E),
                     residual(GG(kron(one_C, v) @ sE @ kron(u, one_B)), kron(b, one_C) @ E @ kron(one_B, c)),
                     residual(GG(kron(u, one_B) @ sE @ kron(one_C, v)), kron(one_B, c) @ E @ kron(b, one_C)))
    out.append(Check("sepid.l.gamma_tensor_products", "(gamma_C(x)gamma_B) intertwines products with sigma E "
                     "and E", l_, tol))
    return out


def check_R(R: LinearMap, tol: float = DEFAULT_TOL) -> Check:
    parts = check_star_homomorphism(R, anti=True, tol=tol, name="R")
    bij = float(abs(R.domain.dim - R.rank())) + float(abs(R.codomain.dim - R.rank()))
    worst = max([c.residual for c in parts] + [bij])
    failing = [c.id for c in parts if not c.passed] + (["R.bijective"] if bij else [])
    return Check("sepid.R_anti_isomorphism", "R: B -> C is a *-anti-isomorphism", worst, tol,
                 detail=("failing: " + ", ".join(failing)) if failing else "")


def verify_separability(B: BlockAlgebra, C: BlockAlgebra, R: LinearMap, nu: Weight,
                        tol: float = DEFAULT_TOL, seed: int = 0,
                        t_samples: Sequence[float] = SIGMA_T) -> tuple[list[Check], SeparabilityTriple | None]:
    """Solve for E, build the triple and run every property check.

    Failures become report entries; the triple is None when it cannot be built.
    """
    checks = [check_R(R, tol)]
    checks += check_kms(nu, "nu", tol, seed=seed, t_samples=t_samples)
    if R.domain.dim != R.codomain.dim or R.rank() < R.domain.dim:
        checks.append(undefined("sepid.solve", "E solves the separability equations and is a projection", tol,
                                "R is not invertible"))
        return checks, None
    info = solve_with_diagnostics(B, C, R, nu, tol, seed)
    if not info.solved:
        checks.append(Check("sepid.solve", "E solves the separability equations and is a projection",
                            max(info.idempotency_residual, info.selfadjoint_residual, info.linear_residual), tol,
                            detail=info.result.explain()))
        return checks, None
    E = info.result
    checks.append(Check("sepid.solve", "E solves the separability equations and is a projection",
                        max(info.idempotency_residual, info.selfadjoint_residual, info.linear_residual), tol,
                        detail=f"rank {info.rank}, nullity {info.nullity}"))
    try:
        triple = build_triple(B, C, R, nu, E, tol)
    except TripleError as exc:
        checks.append(undefined("sepid.triple", "gamma_B = R o sigma^nu_{i/2}, gamma_C = R^{-1} o sigma^mu_{-i/2}, "
                                "mu = nu o R^{-1}", tol, str(exc)))
        return checks, None
    checks.append(Check("sepid.triple", "gamma_B = R o sigma^nu_{i/2}, gamma_C = R^{-1} o sigma^mu_{-i/2}, "
                        "mu = nu o R^{-1}", max(triple.formula_residuals.values()), tol))
    checks += check_kms(triple.mu, "mu", tol, seed=seed, t_samples=t_samples)
    mirror = solve_separability_idempotent(*triple.mirrored(), tol=tol, seed=seed)
    if isinstance(mirror, Element):
        checks.append(Check("sepid.flip_coherence", "flip(E) is the idempotent of (C, mu, R^{-1})",
                            residual(mirror, flip(E)), tol))
    else:
        checks.append(undefined("sepid.flip_coherence", "flip(E) is the idempotent of (C, mu, R^{-1})", tol,
                                mirror.explain()))
    checks += check_sepid_properties(triple, tol, t_samples)
    return checks, triple
