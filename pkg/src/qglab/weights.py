"""Faithful positive functionals and their modular data.

A weight is given by a positive invertible density ``rho`` (one positive
definite matrix per block) and acts as ``psi(x) = sum_k tr(rho_k x_k)``.  The
modular group is ``sigma_z(x) = rho^{iz} x rho^{-iz}``, defined for every
complex ``z`` since everything is finite-dimensional.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .algebra import (
    DEFAULT_TOL,
    BlockAlgebra,
    Element,
    LinearMap,
    kron,
    slice_leg,
    tensor_algebra,
)
from .report import Check

T_SAMPLES = (1.0, -1.0, 0.5, -0.5, 0.3, -0.3, 0.1)


def _pairing_vector(rep: Element) -> np.ndarray:
    """Coordinate vector w with sum_k tr(rep_k x_k) = w . x."""
    out = np.empty_like(rep.vec)
    for _, idx in rep.algebra.groups:
        out[idx] = rep.vec[idx].transpose(0, 2, 1)
    return out


def _block_function(rep: Element, fn: Callable[[np.ndarray], np.ndarray]) -> Element:
    """Apply a scalar function to a Hermitian element through its spectrum."""
    out = np.empty_like(rep.vec)
    for _, idx in rep.algebra.groups:
        lam, U = np.linalg.eigh(rep.vec[idx])
        out[idx] = (U * fn(lam)[:, None, :]) @ np.conj(U).transpose(0, 2, 1)
    return Element(rep.algebra, out)


def _block_diag_operator(algebra: BlockAlgebra, per_block: Callable[[int, int], np.ndarray]) -> np.ndarray:
    """Assemble a dim x dim matrix acting block by block on coordinates."""
    m = np.zeros((algebra.dim, algebra.dim), dtype=complex)
    for k, d in enumerate(algebra.block_dims):
        o = algebra.offsets[k]
        m[o : o + d * d, o : o + d * d] = per_block(k, d)
    return m


@dataclass(frozen=True, eq=False)
class Functional:
    """omega(x) = sum_k tr(rep_k x_k); no positivity assumed."""

    algebra: BlockAlgebra
    rep: Element

    def __post_init__(self):
        if self.rep.algebra != self.algebra:
            raise ValueError("representing element lives in another algebra")

    @classmethod
    def from_vector(cls, algebra: BlockAlgebra, w) -> "Functional":
        """Inverse of `vector`: the functional x -> w . x."""
        tmp = Element(algebra, np.asarray(w, dtype=complex))
        return cls(algebra, Element(algebra, _pairing_vector(tmp)))

    @cached_property
    def vector(self) -> np.ndarray:
        return _pairing_vector(self.rep)

    def __call__(self, x: Element) -> complex:
        return complex(self.vector @ x.vec)

    def norm(self) -> float:
        """Dual of the operator norm: sum of per-block trace norms."""
        total = 0.0
        for b in self.rep.blocks:
            total += float(np.linalg.svd(b, compute_uv=False).sum())
        return total

    def abs(self) -> "Functional":
        return functional_abs(self)


@dataclass(frozen=True, eq=False)
class Weight:
    algebra: BlockAlgebra
    density: Element
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        if self.density.algebra != self.algebra:
            raise ValueError("density lives in another algebra")
        herm = np.linalg.norm((self.density - self.density.star()).vec)
        if herm > self.tol * max(1.0, self.density.norm()):
            raise ValueError(f"density is not Hermitian (residual {herm:.2e})")
        lo = self.density.min_eigenvalue()
        if not lo > 0:
            raise ValueError(f"density is not positive definite (min eigenvalue {lo:.3e}); weight not faithful")

    @classmethod
    def trace(cls, algebra: BlockAlgebra, scale: float = 1.0) -> "Weight":
        return cls(algebra, algebra.one() * scale)

    @classmethod
    def from_vector(cls, algebra: BlockAlgebra, w) -> "Weight":
        f = Functional.from_vector(algebra, w)
        rep = (f.rep + f.rep.star()) * 0.5
        return cls(algebra, rep)

    @cached_property
    def vector(self) -> np.ndarray:
        return _pairing_vector(self.density)

    def __call__(self, x: Element) -> complex:
        return complex(self.vector @ x.vec)

    def as_functional(self) -> Functional:
        return Functional(self.algebra, self.density)

    def power(self, z: complex) -> Element:
        """rho^z by spectral calculus."""
        return _block_function(self.density, lambda lam: np.power(lam.astype(complex), z))

    @cached_property
    def log_density(self) -> Element:
        return _block_function(self.density, np.log)

    def sigma(self, z: complex, x: Element) -> Element:
        return modular_automorphism(self, z, x)

    def sigma_map(self, z: complex) -> LinearMap:
        p = self.power(1j * z).blocks
        q = self.power(-1j * z).blocks
        mat = _block_diag_operator(self.algebra, lambda k, d: np.kron(p[k], q[k].T))
        return LinearMap(self.algebra, self.algebra, mat)

    @property
    def is_tracial(self) -> bool:
        for b in self.density.blocks:
            if np.linalg.norm(b - np.trace(b) / len(b) * np.eye(len(b))) > self.tol:
                return False
        return True


def random_weight(algebra: BlockAlgebra, rng: np.random.Generator, spread: float = 3.0) -> Weight:
    """Random faithful weight with density spectrum in [1/spread, spread]."""
    blocks = []
    for d in algebra.block_dims:
        z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        q, _ = np.linalg.qr(z)
        lam = np.exp(rng.uniform(-np.log(spread), np.log(spread), d))
        blocks.append((q * lam) @ q.conj().T)
    return Weight(algebra, algebra.from_blocks(blocks))


def modular_automorphism(W: Weight, z: complex, x: Element) -> Element:
    """sigma_z(x) = rho^{iz} x rho^{-iz}."""
    return W.power(1j * z) @ x @ W.power(-1j * z)


def _rel(a: complex, b: complex) -> float:
    return abs(a - b) / max(1.0, abs(a), abs(b))


def check_kms(W: Weight, name: str = "psi", tol: float = DEFAULT_TOL, samples: int = 20,
              t_samples: Sequence[float] = (1.0, -1.0, 0.3, -0.3), seed: int = 0,
              modular: Weight | None = None) -> list[Check]:
    """KMS identity, sigma-invariance and psi(ax) = psi(x sigma_{-i}(a)).

    ``modular`` substitutes another density for the modular group, which is how
    a deliberately wrong sigma is injected.
    """
    sig = modular if modular is not None else W
    if modular is not None and modular.algebra != W.algebra:
        raise ValueError("modular density on another algebra")
    rng = np.random.default_rng(seed)
    A = W.algebra
    elems = A.basis() + [A.random(rng) for _ in range(samples)]

    s_half = sig.sigma_map(0.5j)
    kms = 0.0
    for a in elems:
        sa = s_half(a)
        kms = max(kms, _rel(W(a.star() @ a), W(sa @ sa.star())))

    inv = 0.0
    for t in t_samples:
        st = sig.sigma_map(t)
        for a in elems:
            inv = max(inv, _rel(W(st(a)), W(a)))

    s_mi = sig.sigma_map(-1j)
    swap = 0.0
    for _ in range(samples):
        a, x = A.random(rng), A.random(rng)
        swap = max(swap, _rel(W(a @ x), W(x @ s_mi(a))))

    return [
        Check(f"kms.{name}.identity", "KMS condition psi(a*a)=psi(sigma_{i/2}(a)sigma_{i/2}(a)*)", kms, tol),
        Check(f"kms.{name}.invariance", "psi o sigma_t = psi for all real t", inv, tol),
        Check(f"kms.{name}.swap", "psi(ax)=psi(x sigma_{-i}(a))", swap, tol),
    ]


def check_group_law(W: Weight, zs: Sequence[complex], tol: float = DEFAULT_TOL, seed: int = 0) -> Check:
    rng = np.random.default_rng(seed)
    A = W.algebra
    worst = 0.0
    elems = A.basis() + [A.random(rng) for _ in range(5)]
    for z in zs:
        for w in zs:
            lhs = W.sigma_map(z) @ W.sigma_map(w)
            rhs = W.sigma_map(z + w)
            for x in elems:
                a, b = lhs(x), rhs(x)
                worst = max(worst, np.linalg.norm(a.vec - b.vec) / max(1.0, b.norm()))
    return Check("modular.group_law", "sigma_z o sigma_w = sigma_{z+w}", float(worst), tol)


# --------------------------------------------------------------------------
# GNS construction


@dataclass(frozen=True, eq=False)
class GNSData:
    """GNS triple realised on H = (+)_k M_{d_k} with the Hilbert-Schmidt inner product.

    Lambda(a) = a rho^{1/2}, pi(a) is left multiplication, J is the blockwise
    adjoint and nabla is xi -> rho xi rho^{-1}.
    """

    weight: Weight

    @property
    def algebra(self) -> BlockAlgebra:
        return self.weight.algebra

    @property
    def hilbert_dim(self) -> int:
        return self.algebra.dim

    @cached_property
    def _sqrt(self) -> Element:
        return self.weight.power(0.5)

    def lam(self, a: Element) -> np.ndarray:
        return (a @ self._sqrt).vec

    def inner(self, u: np.ndarray, v: np.ndarray) -> complex:
        """<u, v>, linear in the first argument."""
        return complex(np.vdot(v, u))

    def pi(self, a: Element) -> np.ndarray:
        blocks = a.blocks
        return _block_diag_operator(self.algebra, lambda k, d: np.kron(blocks[k], np.eye(d)))

    def J(self, v: np.ndarray) -> np.ndarray:
        return Element(self.algebra, v).star().vec

    @cached_property
    def nabla(self) -> np.ndarray:
        rho = self.weight.density.blocks
        rho_inv = self.weight.power(-1).blocks
        return _block_diag_operator(self.algebra, lambda k, d: np.kron(rho[k], rho_inv[k].T))

    def nabla_power(self, z: complex) -> np.ndarray:
        lam, U = np.linalg.eigh((self.nabla + self.nabla.conj().T) / 2)
        return (U * np.power(lam.astype(complex), z)) @ U.conj().T


def gns(W: Weight) -> GNSData:
    return GNSData(W)


def check_gns(G: GNSData, tol: float = DEFAULT_TOL, t_samples: Sequence[float] = T_SAMPLES,
              name: str = "psi", samples: int = 0, seed: int = 0) -> list[Check]:
    W = G.weight
    A = G.algebra
    rng = np.random.default_rng(seed)
    elems = A.basis() + [A.random(rng) for _ in range(samples)]

    def rel(u, v):
        return float(np.linalg.norm(u - v)) / max(1.0, float(np.linalg.norm(v)))

    ip = 0.0
    rep = 0.0
    for a in elems:
        for b in elems:
            ip = max(ip, _rel(G.inner(G.lam(a), G.lam(b)), W(b.star() @ a)))
            rep = max(rep, rel(G.pi(a) @ G.lam(b), G.lam(a @ b)))

    s_half = W.sigma_map(0.5j)
    jrel = max(rel(G.J(G.lam(x)), G.lam(s_half(x).star())) for x in elems)

    nab = 0.0
    for t in t_samples:
        nt = G.nabla_power(1j * t)
        st = W.sigma_map(t)
        nab = max(nab, max(rel(nt @ G.lam(a), G.lam(st(a))) for a in elems))

    jj = max(rel(G.J(G.J(G.lam(x))), G.lam(x)) for x in elems)
    herm = float(np.linalg.norm(G.nabla - G.nabla.conj().T))
    pos = max(0.0, -float(np.linalg.eigvalsh((G.nabla + G.nabla.conj().T) / 2).min()))

    # Lambda(xa) = J pi(sigma_{i/2}(a))* J Lambda(x)
    lem = 0.0
    for a in elems:
        p = G.pi(s_half(a)).conj().T
        for x in elems:
            lem = max(lem, rel(G.J(p @ G.J(G.lam(x))), G.lam(x @ a)))

    return [
        Check(f"gns.{name}.inner_product", "GNS: <Lambda(a),Lambda(b)> = psi(b*a)", ip, tol),
        Check(f"gns.{name}.representation", "GNS: pi(a)Lambda(b) = Lambda(ab)", rep, tol),
        Check(f"gns.{name}.modular_conjugation", "J Lambda(x) = Lambda(sigma_{i/2}(x)*)", jrel, tol),
        Check(f"gns.{name}.modular_operator", "nabla^{it} Lambda(a) = Lambda(sigma_t(a))", nab, tol),
        Check(f"gns.{name}.J_involution", "J antiunitary with J^2 = 1", jj, tol),
        Check(f"gns.{name}.nabla_positive", "nabla strictly positive self-adjoint", max(herm, pos), tol),
        Check(f"gns.{name}.right_multiplication", "Lambda(xa)=J pi(sigma_{i/2}(a))* J Lambda(x)",
              lem, tol),
    ]


# --------------------------------------------------------------------------
# slices and tensor weights


def slice(side: str, F: Weight | Functional, x: Element) -> Element:
    """(F (x) id)(x) for side='left', (id (x) F)(x) for side='right'."""
    alg = x.algebra
    if not alg.is_tensor:
        raise ValueError("slice needs a tensor-algebra element")
    if side == "left":
        pos = 0
    elif side == "right":
        pos = len(alg.factors) - 1
    else:
        raise ValueError(f"side must be 'left' or 'right', not {side!r}")
    if alg.factors[pos] != F.algebra:
        raise ValueError(f"factor mismatch: slicing {alg.factors[pos]!r} with a functional on {F.algebra!r}")
    return slice_leg(x, F.vector, pos)


def tensor_weight(W1: Weight, W2: Weight) -> Weight:
    return Weight(tensor_algebra(W1.algebra, W2.algebra), kron(W1.density, W2.density))


def functional_abs(omega: Functional) -> Functional:
    """|omega| with density (tau tau*)^{1/2} per block, so that
    |omega(a)|^2 <= ||omega|| |omega|(a*a) and || |omega| || = ||omega||."""
    tau = omega.rep
    return Functional(omega.algebra, _block_function(tau @ tau.star(), lambda lam: np.sqrt(np.clip(lam, 0, None))))


def omegabar_margin(omega: Functional, a: Element) -> float:
    """||omega|| |omega|(a*a) - |omega(a)|^2 (never negative)."""
    ab = functional_abs(omega)
    return float((omega.norm() * ab(a.star() @ a)).real - abs(omega(a)) ** 2)


def omegabar_slice_margin(omega: Functional, z: Element) -> float:
    """Min eigenvalue of ||omega|| (id (x) |omega|)(z*z) - y*y with y = (id (x) omega)(z)."""
    y = slice("right", omega, z)
    rhs = slice("right", functional_abs(omega), z.star() @ z) * omega.norm()
    return (rhs - y.star() @ y).min_eigenvalue()


def generalized_cauchy_schwarz_check(W: Weight, x: Element, y: Element, tol: float = 1e-10) -> Check:
    """((psi(x)id)(y*x))* ((psi(x)id)(y*x)) <= ||(psi(x)id)(y*y)|| (psi(x)id)(x*x)."""
    m = slice("left", W, y.star() @ x)
    lhs = m.star() @ m
    rhs = slice("left", W, x.star() @ x) * slice("left", W, y.star() @ y).operator_norm()
    margin = (rhs - lhs).min_eigenvalue()
    return Check("weights.cauchy_schwarz", "generalized Cauchy-Schwarz inequality for psi (x) id",
                 max(0.0, -margin), tol, detail=f"min eigenvalue {margin:.3e}")
