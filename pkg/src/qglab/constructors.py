"""Quantum groupoid data built from concrete inputs.

* function algebra of a finite groupoid (commutative model),
* convolution algebra of a finite groupoid with abelian isotropy (Wedderburn form),
* the pair quantum groupoid C (x) B of a separability triple (noncommutative base),
* weak Hopf data with counital maps and Haar normalisation,
* named fixtures and deliberately broken variants for negative controls.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .algebra import (
    DEFAULT_TOL,
    BlockAlgebra,
    Element,
    LinearMap,
    SubalgebraEmbedding,
    apply_on_leg,
    diagonal_algebra,
    kron,
    matrix_algebra,
    residual,
    slice_leg,
    span_basis,
    tensor_algebra,
    tensor_map,
)
from .groupoids import (
    FiniteGroupoid,
    cyclic_group,
    disjoint_union,
    pair_groupoid,
    require_valid,
)
from .qgroupoid import Comultiplication, QuantumGroupoidData
from .report import Check
from .sepid import NoSolution, solve_separability_idempotent, transpose_map
from .weights import Functional, Weight, tensor_weight


class UnsupportedIsotropy(ValueError):
    """The convolution model only handles abelian isotropy groups."""


# --------------------------------------------------------------------------
# leaf-level tensor bookkeeping


def leaf_index(alg: BlockAlgebra) -> np.ndarray:
    """Coordinate of every multi-index over the innermost (non-tensor) factors."""
    if not alg.factors:
        return np.arange(alg.dim)
    idx = alg.factor_index
    axis = 0
    for f in alg.factors:
        sub = leaf_index(f)
        idx = np.take(idx, sub, axis=axis)
        axis += sub.ndim
    return idx


def leaf_tensor(x: Element) -> np.ndarray:
    return x.vec[leaf_index(x.algebra)]


def from_leaf_tensor(alg: BlockAlgebra, t: np.ndarray) -> Element:
    v = np.empty(alg.dim, dtype=complex)
    v[leaf_index(alg).reshape(-1)] = np.asarray(t, dtype=complex).reshape(-1)
    return Element(alg, v)


# --------------------------------------------------------------------------
# function algebra model


def function_algebra_model(G: FiniteGroupoid, nu_weights: Sequence[float] | None = None,
                           allow_noncounting: bool = False, name: str = "") -> QuantumGroupoidData:
    """A = functions on G, (Delta f)(p, q) = f(pq) on composable pairs, E = their indicator.

    The base weight must be counting measure on the units; other weights are
    rejected unless ``allow_noncounting`` asks for the (failing) assembly anyway.
    """
    require_valid(G)
    n = len(G)
    A = diagonal_algebra(n)
    AA = tensor_algebra(A, A)
    fi = AA.factor_index
    idx = G.index

    dmat = np.zeros((AA.dim, A.dim), dtype=complex)
    evec = np.zeros(AA.dim, dtype=complex)
    for (p, q), r in G.mult.items():
        dmat[fi[idx[p], idx[q]], idx[r]] = 1.0
        evec[fi[idx[p], idx[q]]] = 1.0
    Delta = Comultiplication(A, LinearMap(A, AA, dmat))
    E = Element(AA, evec)

    nu_ = len(G.units)
    Bbase = diagonal_algebra(nu_)
    w = np.ones(nu_) if nu_weights is None else np.asarray(nu_weights, dtype=float)
    if w.shape != (nu_,):
        raise ValueError(f"expected {nu_} base weights, got {w.size}")
    if not np.allclose(w, 1.0) and not allow_noncounting:
        raise ValueError("the function model needs counting measure on the units: (nu (x) id)(E) = 1 forces "
                         f"nu(1_{{s^-1(u)}}) = 1 for every unit, got weights {w.tolist()}")
    nu = Weight(Bbase, Bbase.from_blocks([[[x]] for x in w]))

    ub = G.unit_index
    iB = np.zeros((n, nu_), dtype=complex)
    iC = np.zeros((n, nu_), dtype=complex)
    for g in G.elements:
        iB[idx[g], ub[G.source[g]]] = 1.0
        iC[idx[g], ub[G.target[g]]] = 1.0
    counting = Weight.trace(A)
    return QuantumGroupoidData(A, Delta, E, Bbase, Bbase, LinearMap.identity(Bbase), nu,
                               LinearMap(Bbase, A, iB), LinearMap(Bbase, A, iC), counting, counting,
                               name=name or "function model", meta={"model": "function", "elements": list(G.elements),
                                                                      "units": list(G.units)})


# --------------------------------------------------------------------------
# convolution algebra model


def _characters(G: FiniteGroupoid, H: list[str], seed: int = 7) -> np.ndarray:
    """Characters of the abelian group H (rows), trivial character first."""
    m = len(H)
    pos = {h: i for i, h in enumerate(H)}
    for a in H:
        for b in H:
            if G.mult[(a, b)] != G.mult[(b, a)]:
                raise UnsupportedIsotropy(f"nonabelian isotropy group at {G.source[H[0]]}: "
                                          f"{a}*{b} != {b}*{a}")
    regs = []
    for h in H:
        L = np.zeros((m, m))
        for j, k in enumerate(H):
            L[pos[G.mult[(h, k)]], j] = 1.0
        regs.append(L)
    rng = np.random.default_rng(seed)
    coef = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    X = sum(c * L for c, L in zip(coef, regs))
    _, V = np.linalg.eig(X)
    Vi = np.linalg.inv(V)
    chi = np.array([[(Vi @ L @ V)[x, x] for L in regs] for x in range(m)])
    # character values are m-th roots of unity: snap to them exactly
    k = np.mod(np.round(np.angle(chi) * m / (2 * np.pi)).astype(int), m)
    order = sorted(range(m), key=lambda x: tuple(k[x]))
    chi = np.exp(2j * np.pi * k[order] / m)
    for x in range(m):
        for a in H:
            for b in H:
                if abs(chi[x, pos[G.mult[(a, b)]]] - chi[x, pos[a]] * chi[x, pos[b]]) > 1e-9:
                    raise RuntimeError("character computation failed")
    return chi


def convolution_algebra_model(G: FiniteGroupoid, name: str = "") -> QuantumGroupoidData:
    """Groupoid convolution algebra in Wedderburn form with Delta(lambda_g) = lambda_g (x) lambda_g.

    A component with k objects and abelian isotropy H contributes |H| copies of
    M_k (one per character); g = tau_i h tau_j^{-1} maps to chi(h) e_ij.
    """
    require_valid(G)
    dims, layout = [], []
    for comp in G.components:
        o1 = comp[0]
        H = G.arrows(o1, o1)
        chi = _characters(G, H)
        taus = []
        for u in comp:
            cands = G.arrows(o1, u)
            taus.append(cands[0])
        layout.append((comp, H, chi, taus, len(dims)))
        dims += [len(comp)] * len(H)
    A = BlockAlgebra(tuple(dims))
    AA = tensor_algebra(A, A)
    n = len(G)
    F = np.zeros((A.dim, n), dtype=complex)
    comp_of = {}
    for c, (comp, H, chi, taus, b0) in enumerate(layout):
        for i, u in enumerate(comp):
            comp_of[u] = (c, i)
    for g in G.elements:
        c, i = comp_of[G.target[g]]
        c2, j = comp_of[G.source[g]]
        comp, H, chi, taus, b0 = layout[c]
        k = len(comp)
        h = G.mult[(G.mult[(G.inverse[taus[i]], g)], taus[j])]
        hpos = H.index(h)
        for x in range(len(H)):
            F[A.offsets[b0 + x] + i * k + j, G.index[g]] = chi[x, hpos]
    lam = [Element(A, F[:, G.index[g]]) for g in G.elements]
    Fi = np.linalg.inv(F)
    D = np.stack([kron(l, l).vec for l in lam], axis=1) @ Fi
    D[np.abs(D) < 1e-14] = 0.0
    Delta = Comultiplication(A, LinearMap(A, AA, D))

    units = list(G.units)
    Bbase = diagonal_algebra(len(units))
    iota = np.stack([lam[G.index[u]].vec for u in units], axis=1)
    E = sum((kron(lam[G.index[u]], lam[G.index[u]]) for u in units), AA.zero())
    blocks = []
    for comp, H, chi, taus, b0 in layout:
        blocks += [np.eye(len(comp)) / len(H)] * len(H)
    phi = Weight(A, A.from_blocks(blocks))
    nu = Weight.trace(Bbase)
    return QuantumGroupoidData(A, Delta, E, Bbase, Bbase, LinearMap.identity(Bbase), nu,
                               LinearMap(Bbase, A, iota), LinearMap(Bbase, A, iota.copy()), phi, phi,
                               name=name or "convolution model",
                               meta={"model": "convolution", "elements": list(G.elements), "units": units,
                                     "lambda": F})


# --------------------------------------------------------------------------
# the pair quantum groupoid of a separability triple


def quantum_pair_groupoid(B: BlockAlgebra, nu: Weight, R: LinearMap | None = None,
                          name: str = "") -> QuantumGroupoidData:
    """A = C (x) B with Delta(c (x) b) = c (x) E (x) b.

    B is the second leg, C the first; E_A = 1 (x) E (x) 1 and phi = psi = mu (x) nu.
    """
    R = transpose_map(B) if R is None else R
    C = R.codomain
    E0 = solve_separability_idempotent(B, C, R, nu)
    if isinstance(E0, NoSolution):
        raise ValueError(E0.explain())
    A = tensor_algebra(C, B)
    AA = tensor_algebra(A, A)
    Eleaf = leaf_tensor(E0)
    cols = []
    for x in A.basis():
        X = leaf_tensor(x)
        cols.append(from_leaf_tensor(AA, np.einsum("gb,ij->gijb", X, Eleaf)).vec)
    Delta = Comultiplication(A, LinearMap(A, AA, np.stack(cols, axis=1)))
    iC = LinearMap.from_function(C, A, lambda c: kron(c, B.one()))
    iB = LinearMap.from_function(B, A, lambda b: kron(C.one(), b))
    E = tensor_map(iB, iC)(E0)
    mu = Weight.from_vector(C, nu.vector @ np.linalg.inv(R.matrix))
    w = tensor_weight(mu, nu)
    return QuantumGroupoidData(A, Delta, E, B, C, R, nu, iB, iC, w, w, name=name or "pair quantum groupoid",
                               meta={"model": "quantum-pair"})


# --------------------------------------------------------------------------
# weak Hopf data


@dataclass(frozen=True, eq=False)
class WeakHopfData:
    A: BlockAlgebra
    Delta: Comultiplication
    epsilon: Functional
    S: LinearMap


def weak_hopf_convolution(G: FiniteGroupoid) -> tuple[WeakHopfData, QuantumGroupoidData]:
    """epsilon(lambda_g) = 1 and S(lambda_g) = lambda_{g^-1} on the convolution model."""
    QG = convolution_algebra_model(G)
    A = QG.A
    F = QG.meta["lambda"]
    Fi = np.linalg.inv(F)
    eps = Functional.from_vector(A, np.ones(len(G)) @ Fi)
    perm = np.array([G.index[G.inverse[g]] for g in G.elements])
    S = LinearMap(A, A, F[:, perm] @ Fi)
    return WeakHopfData(A, QG.Delta, eps, S), QG


def normalised_haar_function(G: FiniteGroupoid) -> Weight:
    """phi(delta_q) = 1 / |t^-1(t(q))|, so that (id (x) phi)(Delta(1)) = 1 on the function model."""
    A = diagonal_algebra(len(G))
    fib = {u: len(G.fiber_target(u)) for u in G.units}
    return Weight(A, A.from_blocks([[[1.0 / fib[G.target[g]]]] for g in G.elements]))


def weak_hopf_function(G: FiniteGroupoid) -> tuple[WeakHopfData, QuantumGroupoidData]:
    """epsilon(f) = sum over units of f(u) and (Sf)(g) = f(g^-1) on the function model.

    The model's counting weight is not normalised; pair it with normalised_haar_function.
    """
    QG = function_algebra_model(G)
    A = QG.A
    w = np.zeros(A.dim)
    for u in G.units:
        w[G.index[u]] = 1.0
    perm = np.array([G.index[G.inverse[g]] for g in G.elements])
    S = LinearMap(A, A, np.eye(A.dim, dtype=complex)[perm])
    return WeakHopfData(A, QG.Delta, Functional.from_vector(A, w), S), QG


def _commutative_image(images: np.ndarray, A: BlockAlgebra, tol: float, seed: int = 3) -> SubalgebraEmbedding:
    """The image of a counital map as an abstract C^r with its embedding.

    Minimal projections come from the spectral projections of a generic
    self-adjoint element of the image.
    """
    U = span_basis(images)
    r = U.shape[1]
    rng = np.random.default_rng(seed)
    h = Element(A, U @ (rng.standard_normal(r) + 1j * rng.standard_normal(r)))
    h = (h + h.star()) * 0.5
    for x in (Element(A, U[:, i]) for i in range(r)):
        for y in (Element(A, U[:, j]) for j in range(r)):
            if residual(x @ y, y @ x) > tol:
                raise ValueError("the image is noncommutative; only commutative images are converted to C^r")
    # spectral projections across all blocks, grouped by eigenvalue
    vals, projs = [], []
    for k, blk in enumerate(h.blocks):
        lam, V = np.linalg.eigh(blk)
        for l, v in zip(lam, V.T):
            vals.append(l)
            projs.append((k, v))
    order = np.argsort(vals)
    groups: list[list[int]] = []
    for i in order:
        if groups and abs(vals[i] - vals[groups[-1][-1]]) <= 1e-8 * max(1.0, abs(vals[i])):
            groups[-1].append(i)
        else:
            groups.append([i])
    P = []
    for grp in groups:
        blocks = [np.zeros((d, d), dtype=complex) for d in A.block_dims]
        for i in grp:
            k, v = projs[i]
            blocks[k] += np.outer(v, v.conj())
        P.append(A.from_blocks(blocks))
    if len(P) != r:
        raise ValueError(f"found {len(P)} minimal projections for an image of dimension {r}")
    P.sort(key=lambda p: tuple(-np.abs(p.vec).round(9)))
    Bc = diagonal_algebra(r)
    iota = LinearMap(Bc, A, np.stack([p.vec for p in P], axis=1))
    return SubalgebraEmbedding(Bc, A, iota, tol=max(tol, 1e-8))


def counital_maps(W: WeakHopfData, tol: float = DEFAULT_TOL):
    """eps_s(x) = (id (x) eps)((1 (x) x)Delta(1)) and eps_t(x) = (eps (x) id)(Delta(1)(x (x) 1)).

    Returns (eps_s, eps_t, image of eps_s, image of eps_t); the images are
    returned as SubalgebraEmbeddings of C^r (commutative images only).
    """
    A = W.A
    one = A.one()
    D1 = W.Delta(one)
    eps_s = LinearMap.from_function(A, A, lambda x: slice_leg(kron(one, x) @ D1, W.epsilon.vector, 1))
    eps_t = LinearMap.from_function(A, A, lambda x: slice_leg(D1 @ kron(x, one), W.epsilon.vector, 0))
    Bimg = _commutative_image(eps_s.matrix, A, tol)
    Cimg = _commutative_image(eps_t.matrix, A, tol)
    return eps_s, eps_t, Bimg, Cimg


def check_weak_hopf_haar(W: WeakHopfData, phi: Weight, tol: float = DEFAULT_TOL) -> list[Check]:
    A = W.A
    inv = max(abs(phi(W.S(x)) - phi(x)) / max(1.0, abs(phi(x))) for x in A.basis())
    norm = residual(slice_leg(W.Delta(A.one()), phi.vector, 1), A.one(), scale=1.0)
    eps_s, eps_t, _, _ = counital_maps(W, tol)
    coh = max(residual(W.S(eps_t(x)), eps_s(W.S(x))) for x in A.basis())
    return [
        Check("weak_hopf.haar_S_invariance", "phi o S = phi", inv, tol),
        Check("weak_hopf.haar_normalisation", "(id(x)phi)(Delta(1)) = 1", norm, tol),
        Check("weak_hopf.counital_coherence", "S o eps_t = eps_s o S", coh, tol),
    ]


# --------------------------------------------------------------------------
# fixtures


def pair_groupoid_function(n: int = 3) -> QuantumGroupoidData:
    """functions on the pair groupoid of n points."""
    return function_algebra_model(pair_groupoid(n), name=f"pair-groupoid function algebra n={n}")


def matrix_fixture(n: int = 2) -> QuantumGroupoidData:
    """M_n with Delta(e_ij) = e_ij (x) e_ij (convolution model of the pair groupoid)."""
    return convolution_algebra_model(pair_groupoid(n), name=f"matrix algebra M_{n}")


def group_function(m: int = 2) -> QuantumGroupoidData:
    """functions on Z_m."""
    return function_algebra_model(cyclic_group(m), name=f"function algebra of Z_{m}")


def group_convolution(m: int = 3) -> QuantumGroupoidData:
    return convolution_algebra_model(cyclic_group(m), name=f"group algebra of Z_{m}")


def disjoint_union_groupoid() -> FiniteGroupoid:
    return disjoint_union(cyclic_group(2), pair_groupoid(2), prefixes=["a.", "b."])


def disjoint_union_fixture(model: str = "function") -> QuantumGroupoidData:
    G = disjoint_union_groupoid()
    build = function_algebra_model if model == "function" else convolution_algebra_model
    return build(G, name=f"disjoint union Z_2 + pair(2), {model} model")


def matrix_base_triple(n: int = 2):
    """B = C = M_n, R = transpose, nu = n Tr."""
    B = matrix_algebra(n)
    return B, B, transpose_map(B), Weight.trace(B, float(n))


def bad_weights_triple():
    """B = C = C^2, R = id, nu with weights (1, 2)."""
    B = diagonal_algebra(2)
    return B, B, LinearMap.identity(B), Weight(B, B.from_blocks([[[1.0]], [[2.0]]]))


def bad_weights_assembly() -> QuantumGroupoidData:
    """Assembly: pair groupoid on 2 points with base weights (1, 2)."""
    return function_algebra_model(pair_groupoid(2), nu_weights=(1.0, 2.0), allow_noncounting=True,
                                  name="pair groupoid with non-counting base weight")


def nontracial_base(n: int = 2) -> tuple[BlockAlgebra, Weight]:
    """M_n with nu = Tr(rho .), rho diagonal with tr(rho^-1) = 1 and distinct eigenvalues."""
    lam = np.arange(1, n + 1, dtype=float)
    rho = np.diag(lam * np.sum(1.0 / lam))
    B = matrix_algebra(n)
    return B, Weight(B, B.from_blocks([rho]))


def quantum_pair_fixture(n: int = 2, tracial: bool = False) -> QuantumGroupoidData:
    if tracial:
        B, _, R, nu = matrix_base_triple(n)
    else:
        B, nu = nontracial_base(n)
        R = transpose_map(B)
    return quantum_pair_groupoid(B, nu, R, name=f"pair quantum groupoid over M_{n}"
                                 + (" (tracial)" if tracial else " (non-tracial)"))


# --------------------------------------------------------------------------
# injected defects


def drop_delta_image(QG: QuantumGroupoidData, index: int | None = None) -> QuantumGroupoidData:
    """Delta with the image of one basis element set to zero (an off-diagonal unit if there is one)."""
    A = QG.A
    if index is None:
        _, r, c = A.coords
        off = np.nonzero(r != c)[0]
        index = int(off[0]) if off.size else 0
    mat = QG.Delta.map.matrix.copy()
    mat[:, index] = 0.0
    return QG.replace(Delta=Comultiplication(A, LinearMap(A, QG.AA, mat), strict=False))


def with_trivial_E(QG: QuantumGroupoidData) -> QuantumGroupoidData:
    return QG.replace(E=QG.AA.one())


def with_weights(QG: QuantumGroupoidData, phi: Weight | None = None, psi: Weight | None = None):
    return QG.replace(phi=phi or QG.phi, psi=psi or QG.psi)


def skewed_weight(A: BlockAlgebra, off: float = 0.5) -> Weight:
    """A non-diagonal density (first block [[2, off], [off, 1]], identity elsewhere)."""
    blocks = []
    for k, d in enumerate(A.block_dims):
        b = np.eye(d, dtype=complex)
        if d >= 2 and not any(isinstance(x, np.ndarray) and x.shape[0] >= 2 for x in blocks):
            b[0, 0] = 2.0
            b[0, 1] = b[1, 0] = off
        blocks.append(b)
    return Weight(A, A.from_blocks(blocks))


def with_identity_R(QG: QuantumGroupoidData) -> QuantumGroupoidData:
    if QG.B != QG.C:
        raise ValueError("identity R needs B = C")
    return QG.replace(R=LinearMap.identity(QG.B))


def break_associativity(G: FiniteGroupoid) -> FiniteGroupoid:
    """Redirect one product pq to another arrow with the same source and target."""
    for (p, q), r in G.mult.items():
        if p in G.units or q in G.units:
            continue
        alts = [g for g in G.arrows(G.source[r], G.target[r]) if g != r]
        if alts:
            mult = dict(G.mult)
            mult[(p, q)] = alts[0]
            return FiniteGroupoid(G.elements, G.units, G.source, G.target, mult, G.inverse)
    raise ValueError("no product can be redirected without changing source or target")
