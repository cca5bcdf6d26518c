"""Finite-dimensional C*-algebras in Wedderburn form.

An algebra is a direct sum of full matrix blocks ``M_{d_1} + ... + M_{d_k}``.
Elements are stored as a flat complex coordinate vector in the matrix-unit
basis: block by block, each block flattened row-major.  Tensor products keep
track of their factors so that legs can be sliced, flipped and mapped.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class BlockAlgebra:
    block_dims: tuple[int, ...]
    factors: tuple["BlockAlgebra", ...] = ()

    def __post_init__(self):
        dims = tuple(int(d) for d in self.block_dims)
        if not dims:
            raise ValueError("an algebra needs at least one block")
        if any(d < 1 for d in dims):
            raise ValueError(f"block dimensions must be positive, got {dims}")
        object.__setattr__(self, "block_dims", dims)
        object.__setattr__(self, "factors", tuple(self.factors))

    def __repr__(self):
        if self.factors:
            return " (x) ".join(repr(f) for f in self.factors)
        return "+".join(f"M{d}" for d in self.block_dims)

    @cached_property
    def dim(self) -> int:
        return sum(d * d for d in self.block_dims)

    @property
    def total_dim(self) -> int:
        return self.dim

    @property
    def is_tensor(self) -> bool:
        return len(self.factors) >= 2

    @cached_property
    def offsets(self) -> np.ndarray:
        sizes = [d * d for d in self.block_dims]
        return np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(int)

    @cached_property
    def coords(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(block, row, col) of every basis coordinate."""
        blk, row, col = [], [], []
        for k, d in enumerate(self.block_dims):
            r, c = np.divmod(np.arange(d * d), d)
            blk.append(np.full(d * d, k))
            row.append(r)
            col.append(c)
        return np.concatenate(blk), np.concatenate(row), np.concatenate(col)

    @cached_property
    def groups(self) -> list[tuple[int, np.ndarray]]:
        """Blocks grouped by size: (d, index array of shape (m, d, d))."""
        out = []
        for d in sorted(set(self.block_dims)):
            ks = [k for k, dk in enumerate(self.block_dims) if dk == d]
            idx = np.stack([self.offsets[k] + np.arange(d * d).reshape(d, d) for k in ks])
            out.append((d, idx))
        return out

    @cached_property
    def factor_index(self) -> np.ndarray:
        """Flat coordinate of each multi-index over the factors' bases."""
        if not self.factors:
            return np.arange(self.dim)
        return _tensor_index(self.factors)

    @cached_property
    def factor_shape(self) -> tuple[int, ...]:
        return tuple(f.dim for f in self.factors) if self.factors else (self.dim,)

    # element constructors -------------------------------------------------

    def zero(self) -> "Element":
        return Element(self, np.zeros(self.dim, dtype=complex))

    def one(self) -> "Element":
        v = np.zeros(self.dim, dtype=complex)
        for k, d in enumerate(self.block_dims):
            v[self.offsets[k] + np.arange(d) * (d + 1)] = 1.0
        return Element(self, v)

    def unit(self, block: int, i: int, j: int) -> "Element":
        """Matrix unit e_{ij} in the given block (0-based)."""
        d = self.block_dims[block]
        v = np.zeros(self.dim, dtype=complex)
        v[self.offsets[block] + i * d + j] = 1.0
        return Element(self, v)

    def basis(self) -> list["Element"]:
        eye = np.eye(self.dim, dtype=complex)
        return [Element(self, eye[a]) for a in range(self.dim)]

    def from_blocks(self, blocks: Sequence) -> "Element":
        if len(blocks) != len(self.block_dims):
            raise ValueError(f"expected {len(self.block_dims)} blocks, got {len(blocks)}")
        parts = []
        for d, b in zip(self.block_dims, blocks):
            b = np.asarray(b, dtype=complex)
            if b.shape != (d, d):
                raise ValueError(f"block shape {b.shape} does not match ({d}, {d})")
            parts.append(b.reshape(-1))
        return Element(self, np.concatenate(parts))

    def from_vector(self, v) -> "Element":
        v = np.asarray(v, dtype=complex).reshape(-1)
        if v.shape != (self.dim,):
            raise ValueError(f"coordinate vector has length {v.size}, expected {self.dim}")
        return Element(self, v.copy())

    def random(self, rng: np.random.Generator, hermitian: bool = False) -> "Element":
        v = rng.standard_normal(self.dim) + 1j * rng.standard_normal(self.dim)
        x = Element(self, v)
        return (x + x.star()) * 0.5 if hermitian else x

    def from_factor_tensor(self, t: np.ndarray) -> "Element":
        t = np.asarray(t, dtype=complex)
        v = np.empty(self.dim, dtype=complex)
        v[self.factor_index.reshape(-1)] = t.reshape(-1)
        return Element(self, v)


def _tensor_index(factors: Sequence[BlockAlgebra]) -> np.ndarray:
    m = len(factors)
    shape = tuple(f.dim for f in factors)
    nblocks = [len(f.block_dims) for f in factors]

    def axis(arr, i):
        s = [1] * m
        s[i] = -1
        return np.asarray(arr).reshape(s)

    blk = np.zeros((1,) * m, dtype=int)
    block_size = np.ones((1,) * m, dtype=int)
    row = np.zeros((1,) * m, dtype=int)
    col = np.zeros((1,) * m, dtype=int)
    for i, f in enumerate(factors):
        k, r, c = f.coords
        d = axis(np.asarray(f.block_dims)[k], i)
        blk = blk * nblocks[i] + axis(k, i)
        row = row * d + axis(r, i)
        col = col * d + axis(c, i)
        block_size = block_size * d
    dims = [1]
    for f in factors:
        dims = [a * b for a in dims for b in f.block_dims]
    offsets = np.concatenate([[0], np.cumsum(np.square(dims))[:-1]]).astype(int)
    flat = offsets[blk] + row * block_size + col
    return np.broadcast_to(flat, shape).copy()


@lru_cache(maxsize=256)
def tensor_algebra(*algebras: BlockAlgebra) -> BlockAlgebra:
    """A1 (x) A2 (x) ...; blocks are all products, ordered lexicographically.

    Results are memoised so index tables are computed once per factor tuple.
    """
    if len(algebras) < 2:
        raise ValueError("tensor_algebra needs at least two factors")
    dims = [1]
    for a in algebras:
        dims = [x * y for x in dims for y in a.block_dims]
    return BlockAlgebra(tuple(dims), tuple(algebras))


@dataclass(frozen=True, eq=False)
class Element:
    algebra: BlockAlgebra
    vec: np.ndarray

    def __repr__(self):
        return f"Element({self.algebra!r}, {np.round(self.vec, 6)})"

    @property
    def blocks(self) -> list[np.ndarray]:
        return [
            self.vec[o : o + d * d].reshape(d, d)
            for o, d in zip(self.algebra.offsets, self.algebra.block_dims)
        ]

    def _same(self, other: "Element"):
        if not isinstance(other, Element):
            return NotImplemented
        if other.algebra != self.algebra:
            raise ValueError(f"algebra mismatch: {self.algebra!r} vs {other.algebra!r}")
        return True

    def __add__(self, other):
        if self._same(other) is NotImplemented:
            return NotImplemented
        return Element(self.algebra, self.vec + other.vec)

    def __sub__(self, other):
        if self._same(other) is NotImplemented:
            return NotImplemented
        return Element(self.algebra, self.vec - other.vec)

    def __neg__(self):
        return Element(self.algebra, -self.vec)

    def __mul__(self, scalar):
        if isinstance(scalar, Element):
            raise TypeError("use @ for the algebra product")
        return Element(self.algebra, self.vec * complex(scalar))

    __rmul__ = __mul__

    def __matmul__(self, other: "Element") -> "Element":
        if self._same(other) is NotImplemented:
            return NotImplemented
        out = np.empty_like(self.vec)
        for _, idx in self.algebra.groups:
            out[idx] = self.vec[idx] @ other.vec[idx]
        return Element(self.algebra, out)

    def star(self) -> "Element":
        out = np.empty_like(self.vec)
        for _, idx in self.algebra.groups:
            out[idx] = np.conj(self.vec[idx]).transpose(0, 2, 1)
        return Element(self.algebra, out)

    def norm(self) -> float:
        """Frobenius norm of the coordinate vector."""
        return float(np.linalg.norm(self.vec))

    def operator_norm(self) -> float:
        best = 0.0
        for _, idx in self.algebra.groups:
            s = np.linalg.svd(self.vec[idx], compute_uv=False)
            best = max(best, float(s.max(initial=0.0)))
        return best

    def min_eigenvalue(self) -> float:
        """Smallest eigenvalue of the Hermitian part (positivity test)."""
        h = (self + self.star()) * 0.5
        lo = np.inf
        for _, idx in self.algebra.groups:
            lo = min(lo, float(np.linalg.eigvalsh(h.vec[idx]).min()))
        return lo

    def factor_tensor(self) -> np.ndarray:
        return self.vec[self.algebra.factor_index]

    def allclose(self, other: "Element", tol: float = DEFAULT_TOL) -> bool:
        return residual(self, other) <= tol


def residual(x: Element, y: Element, scale: float | None = None) -> float:
    """Frobenius distance relative to max(1, scale of the inputs)."""
    if scale is None:
        scale = max(x.norm(), y.norm())
    return float(np.linalg.norm(x.vec - y.vec)) / max(1.0, scale)


def kron(*xs: Element) -> Element:
    alg = tensor_algebra(*(x.algebra for x in xs))
    t = xs[0].vec
    for x in xs[1:]:
        t = np.multiply.outer(t, x.vec)
    return alg.from_factor_tensor(t)


def flip(x: Element) -> Element:
    """The flip map A1 (x) A2 -> A2 (x) A1."""
    alg = x.algebra
    if len(alg.factors) != 2:
        raise ValueError("flip needs an element of a two-fold tensor algebra")
    target = tensor_algebra(alg.factors[1], alg.factors[0])
    return target.from_factor_tensor(x.factor_tensor().T)


def permute_legs(x: Element, order: Sequence[int]) -> Element:
    alg = x.algebra
    if not alg.is_tensor:
        raise ValueError("not a tensor-algebra element")
    target = tensor_algebra(*(alg.factors[i] for i in order))
    return target.from_factor_tensor(np.transpose(x.factor_tensor(), order))


def leg(x: Element, n_legs: int, position: int) -> Element:
    """Place x in leg `position` of an n-fold tensor power, units elsewhere."""
    A = x.algebra
    parts = [A.one() for _ in range(n_legs)]
    parts[position] = x
    return kron(*parts)


# --------------------------------------------------------------------------
# linear maps


FLAGS = ("multiplicative", "anti_multiplicative", "star_preserving", "unital", "injective")


@dataclass(frozen=True, eq=False)
class LinearMap:
    """A linear map between block algebras, as a matrix on coordinates.

    Claimed ``flags`` are checked on the basis when the map is built; a claim
    that does not hold raises ``ValueError``.
    """

    domain: BlockAlgebra
    codomain: BlockAlgebra
    matrix: np.ndarray
    flags: frozenset = field(default_factory=frozenset)
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.codomain.dim, self.domain.dim):
            raise ValueError(
                f"matrix shape {m.shape} does not fit {self.domain!r} -> {self.codomain!r}"
            )
        object.__setattr__(self, "matrix", m)
        flags = frozenset(self.flags)
        unknown = flags - set(FLAGS)
        if unknown:
            raise ValueError(f"unknown flags {sorted(unknown)}")
        object.__setattr__(self, "flags", flags)
        if flags:
            failed = [f for f, r in flag_residuals(self, flags).items() if r > self.tol]
            if failed:
                raise ValueError(f"claimed flags do not hold: {failed}")

    @classmethod
    def from_function(cls, domain, codomain, f: Callable[[Element], Element], flags=(), tol=DEFAULT_TOL):
        cols = [f(e).vec for e in domain.basis()]
        return cls(domain, codomain, np.stack(cols, axis=1), frozenset(flags), tol)

    @classmethod
    def identity(cls, algebra: BlockAlgebra, flags=()):
        return cls(algebra, algebra, np.eye(algebra.dim, dtype=complex), frozenset(flags))

    def __call__(self, x: Element) -> Element:
        if x.algebra != self.domain:
            raise ValueError(f"map expects {self.domain!r}, got {x.algebra!r}")
        return Element(self.codomain, self.matrix @ x.vec)

    def __matmul__(self, other: "LinearMap") -> "LinearMap":
        if other.codomain != self.domain:
            raise ValueError("cannot compose: codomain/domain mismatch")
        return LinearMap(other.domain, self.codomain, self.matrix @ other.matrix)

    def inverse(self) -> "LinearMap":
        return LinearMap(self.codomain, self.domain, np.linalg.inv(self.matrix))

    def rank(self, rtol: float = 1e-10) -> int:
        return matrix_rank(self.matrix, rtol)

    def with_flags(self, *flags) -> "LinearMap":
        return LinearMap(self.domain, self.codomain, self.matrix, frozenset(flags), self.tol)


def tensor_map(*maps: LinearMap) -> LinearMap:
    """T1 (x) T2 (x) ... between the corresponding tensor algebras."""
    dom = tensor_algebra(*(m.domain for m in maps))
    cod = tensor_algebra(*(m.codomain for m in maps))
    big = maps[0].matrix
    for m in maps[1:]:
        big = np.kron(big, m.matrix)
    mat = np.zeros((cod.dim, dom.dim), dtype=complex)
    rows = cod.factor_index.reshape(-1)
    cols = dom.factor_index.reshape(-1)
    mat[np.ix_(rows, cols)] = big
    return LinearMap(dom, cod, mat)


def apply_on_leg(x: Element, T: LinearMap, position: int, target: BlockAlgebra | None = None) -> Element:
    """(id (x) .. T .. (x) id)(x) without forming the big matrix.

    If T maps into a tensor algebra and ``target`` has the legs split out, the
    image leg is expanded into its factors.
    """
    alg = x.algebra
    if not alg.is_tensor:
        raise ValueError("not a tensor-algebra element")
    if alg.factors[position] != T.domain:
        raise ValueError(f"leg {position} is {alg.factors[position]!r}, map expects {T.domain!r}")
    t = np.moveaxis(x.factor_tensor(), position, 0)
    rest = t.shape[1:]
    img = (T.matrix @ t.reshape(t.shape[0], -1)).reshape((T.codomain.dim,) + rest)
    new_factors = list(alg.factors)
    if target is None:
        new_factors[position] = T.codomain
        target = tensor_algebra(*new_factors)
        img = np.moveaxis(img, 0, position)
        return target.from_factor_tensor(img)
    if T.codomain.is_tensor and len(target.factors) == len(alg.factors) + len(T.codomain.factors) - 1:
        sub = T.codomain
        nsub = len(sub.factors)
        expanded = img[sub.factor_index]
        order = (list(range(nsub, nsub + position)) + list(range(nsub))
                 + list(range(nsub + position, nsub + len(rest))))
        return target.from_factor_tensor(np.transpose(expanded, order))
    new_factors[position] = T.codomain
    if tuple(new_factors) != target.factors:
        raise ValueError("target algebra does not match the mapped legs")
    img = np.moveaxis(img, 0, position)
    return target.from_factor_tensor(img)


def slice_leg(x: Element, functional_vec: np.ndarray, position: int) -> Element:
    """Contract leg `position` against a functional given by its coordinate vector."""
    alg = x.algebra
    if not alg.is_tensor:
        raise ValueError("not a tensor-algebra element")
    if functional_vec.shape != (alg.factors[position].dim,):
        raise ValueError("functional does not match the sliced leg")
    t = np.tensordot(x.factor_tensor(), functional_vec, axes=([position], [0]))
    rest = [f for i, f in enumerate(alg.factors) if i != position]
    if len(rest) == 1:
        return Element(rest[0], np.ascontiguousarray(t, dtype=complex))
    return tensor_algebra(*rest).from_factor_tensor(t)


# --------------------------------------------------------------------------
# spans and ranks


def matrix_rank(m: np.ndarray, rtol: float = 1e-10) -> int:
    if m.size == 0:
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def span_basis(vectors: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis (columns) for the column span of `vectors`."""
    if vectors.size == 0:
        return np.zeros((vectors.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(vectors, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return np.zeros((vectors.shape[0], 0), dtype=complex)
    r = int(np.sum(s > rtol * s[0]))
    return u[:, :r]


@dataclass(frozen=True)
class SpanRelation:
    relation: str  # "equal" | "subset" | "superset" | "incomparable"
    dim1: int
    dim2: int
    dim_joint: int

    @property
    def equal(self) -> bool:
        return self.relation == "equal"


def _as_columns(S: Iterable[Element] | np.ndarray, algebra=None) -> tuple[np.ndarray, BlockAlgebra | None]:
    if isinstance(S, np.ndarray):
        return S, algebra
    S = list(S)
    if not S:
        return np.zeros((algebra.dim if algebra else 0, 0), dtype=complex), algebra
    alg = S[0].algebra
    for x in S:
        if x.algebra != alg:
            raise ValueError("span_equals: mixed algebras in one set")
    return np.stack([x.vec for x in S], axis=1), alg


def span_equals(S1, S2, rtol: float = 1e-10) -> SpanRelation:
    """Relationship between the linear spans of two sets of elements.

    Either set may also be given directly as a matrix whose columns are
    coordinate vectors.
    """
    m1, a1 = _as_columns(S1)
    m2, a2 = _as_columns(S2)
    if a1 is not None and a2 is not None and a1 != a2:
        raise ValueError(f"span_equals: mixed algebras {a1!r} and {a2!r}")
    if m1.shape[0] != m2.shape[0]:
        raise ValueError("span_equals: vectors of different length")
    r1 = matrix_rank(m1, rtol)
    r2 = matrix_rank(m2, rtol)
    rj = matrix_rank(np.hstack([m1, m2]), rtol)
    if r1 == rj and r2 == rj:
        rel = "equal"
    elif r1 == rj:
        rel = "superset"
    elif r2 == rj:
        rel = "subset"
    else:
        rel = "incomparable"
    return SpanRelation(rel, r1, r2, rj)


def projection_distance(v: np.ndarray, basis: np.ndarray) -> float:
    """Distance from v to the column span of an orthonormal basis."""
    if basis.shape[1] == 0:
        return float(np.linalg.norm(v))
    return float(np.linalg.norm(v - basis @ (basis.conj().T @ v)))


# --------------------------------------------------------------------------
# structure checks


def _pair_products(T, basis, anti: bool) -> float:
    worst = 0.0
    images = [T(b) for b in basis]
    for i, x in enumerate(basis):
        for j, y in enumerate(basis):
            lhs = T(x @ y)
            rhs = images[j] @ images[i] if anti else images[i] @ images[j]
            worst = max(worst, float(np.linalg.norm(lhs.vec - rhs.vec)))
    return worst


def flag_residuals(T, flags: Iterable[str]) -> dict[str, float]:
    basis = T.domain.basis()
    out = {}
    for f in flags:
        if f == "multiplicative":
            out[f] = _pair_products(T, basis, anti=False)
        elif f == "anti_multiplicative":
            out[f] = _pair_products(T, basis, anti=True)
        elif f == "star_preserving":
            out[f] = max(float(np.linalg.norm(T(b.star()).vec - T(b).star().vec)) for b in basis)
        elif f == "unital":
            out[f] = float(np.linalg.norm(T(T.domain.one()).vec - T.codomain.one().vec))
        elif f == "injective":
            m = np.stack([T(b).vec for b in basis], axis=1)
            out[f] = float(T.domain.dim - matrix_rank(m))
    return out


@dataclass(frozen=True, eq=False)
class FunctionMap:
    """An arbitrary callable between algebras, e.g. a map that may fail to be linear."""

    domain: BlockAlgebra
    codomain: BlockAlgebra
    fn: Callable[[Element], Element]

    def __call__(self, x: Element) -> Element:
        return self.fn(x)


def check_star_homomorphism(T, anti: bool = False, tol: float = DEFAULT_TOL, name: str = "map",
                            anchor: str = "*-homomorphism"):
    """Report fragment: linearity, (anti-)multiplicativity, *-preservation, unitality."""
    from .report import Check

    basis = T.domain.basis()
    rng = np.random.default_rng(0)
    lin = 0.0
    for b in basis:
        lin = max(lin, float(np.linalg.norm(T(b * 1j).vec - 1j * T(b).vec)))
    x, y = T.domain.random(rng), T.domain.random(rng)
    lin = max(lin, float(np.linalg.norm(T(x + y * 2.0).vec - T(x).vec - 2.0 * T(y).vec)))
    res = {
        "linear": lin,
        "anti_multiplicative" if anti else "multiplicative": _pair_products(T, basis, anti),
        "star_preserving": max(float(np.linalg.norm(T(b.star()).vec - T(b).star().vec)) for b in basis),
        "unital": float(np.linalg.norm(T(T.domain.one()).vec - T.codomain.one().vec)),
    }
    return [Check(f"{name}.{k}", anchor, v, tol) for k, v in res.items()]


@dataclass(frozen=True, eq=False)
class SubalgebraEmbedding:
    """A unital injective *-homomorphism ``iota: abstract -> host``."""

    abstract: BlockAlgebra
    host: BlockAlgebra
    iota: LinearMap
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        if self.iota.domain != self.abstract or self.iota.codomain != self.host:
            raise ValueError("iota does not map abstract -> host")
        problems = self.residuals()
        bad = {k: v for k, v in problems.items() if v > self.tol}
        if bad:
            raise ValueError(f"not a unital injective *-embedding: {bad}")

    def residuals(self) -> dict[str, float]:
        res = flag_residuals(self.iota, ("multiplicative", "star_preserving", "unital", "injective"))
        iso = 0.0
        for b in self.abstract.basis():
            iso = max(iso, abs(self.iota(b).operator_norm() - b.operator_norm()))
        res["isometric"] = iso
        return res

    @cached_property
    def image_basis(self) -> np.ndarray:
        return span_basis(self.iota.matrix)

    def __call__(self, x: Element) -> Element:
        return self.iota(x)

    def preimage(self, y: Element) -> tuple[Element, float]:
        """Least-squares preimage and the distance of y from the image."""
        coef, *_ = np.linalg.lstsq(self.iota.matrix, y.vec, rcond=None)
        dist = float(np.linalg.norm(self.iota.matrix @ coef - y.vec))
        return Element(self.abstract, coef), dist


def diagonal_algebra(n: int) -> BlockAlgebra:
    """The commutative algebra C^n."""
    return BlockAlgebra((1,) * n)


def matrix_algebra(n: int) -> BlockAlgebra:
    return BlockAlgebra((n,))
