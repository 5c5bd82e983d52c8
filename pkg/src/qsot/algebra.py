"""Finite-dimensional operator algebras realized as direct sums of matrix blocks.

An algebra is a list of block dimensions ``(n_1, ..., n_k)``; its elements are
block-diagonal complex matrices stored block by block.  A classical algebra is
one whose blocks are all 1x1, so its elements are diagonal and its states are
probability vectors.  Tensor products of algebras are again block algebras,
with one block per tuple of factor blocks, ordered lexicographically.

Coordinates: every element has a vector of coefficients in the orthonormal
trace-inner-product basis of matrix units, ordered (block, row, column) with
blocks ascending and entries row-major inside each block.  All superoperator
matrices in this package are written in that basis.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Iterator, Sequence

import numpy as np

DEFAULT_ATOL = 1e-9

__all__ = [
    "DEFAULT_ATOL",
    "AlgebraShape",
    "AlgebraElement",
    "FactoredElement",
    "tensor_shape",
    "product_shape",
    "hs_kron_permutation",
    "from_hs",
    "tensor_elements",
    "partial_trace",
    "spectrum",
    "max_abs_diff",
    "identity_element",
    "zero_element",
    "basis_element",
    "classical_state",
    "delta_state",
    "random_element",
    "random_hermitian",
    "random_state",
    "random_faithful_state",
    "random_virtual_state",
    "haar_unitary",
    "as_rng",
]


def as_rng(seed: int | np.random.Generator | None) -> np.random.Generator:
    """Coerce a seed or generator into a numpy Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class AlgebraShape:
    """Block dimensions ``(n_1, ..., n_k)`` of a direct sum of matrix algebras."""

    blocks: tuple[int, ...]

    def __init__(self, blocks: Iterable[int]):
        blocks = tuple(int(n) for n in blocks)
        if not blocks:
            raise ValueError("an algebra needs at least one block")
        if any(n < 1 for n in blocks):
            raise ValueError(f"block dimensions must be >= 1, got {blocks}")
        object.__setattr__(self, "blocks", blocks)

    @property
    def num_blocks(self) -> int:
        return len(self.blocks)

    @property
    def total_dim(self) -> int:
        """Dimension of the algebra as a complex vector space (sum of n_i^2)."""
        return sum(n * n for n in self.blocks)

    @property
    def hilbert_dim(self) -> int:
        """Dimension of the Hilbert space the algebra acts on (sum of n_i)."""
        return sum(self.blocks)

    @property
    def is_classical(self) -> bool:
        """True when every block is 1x1 (commutative, diagonal algebra)."""
        return all(n == 1 for n in self.blocks)

    @property
    def is_matrix_algebra(self) -> bool:
        return len(self.blocks) == 1

    @property
    def hs_offsets(self) -> tuple[int, ...]:
        """Start offset of each block in the coefficient vector."""
        offs, acc = [], 0
        for n in self.blocks:
            offs.append(acc)
            acc += n * n
        return tuple(offs)

    def hs_slice(self, block: int) -> slice:
        off = self.hs_offsets[block]
        n = self.blocks[block]
        return slice(off, off + n * n)

    def hs_index(self, block: int, row: int, col: int) -> int:
        n = self.blocks[block]
        return self.hs_offsets[block] + row * n + col

    def dagger_permutation(self) -> np.ndarray:
        """Index permutation sending the coefficient of E_ij to that of E_ji."""
        parts = []
        for off, n in zip(self.hs_offsets, self.blocks):
            idx = off + np.arange(n * n).reshape(n, n).T.reshape(-1)
            parts.append(idx)
        return np.concatenate(parts)

    def trace_vector(self) -> np.ndarray:
        """Coefficient vector of the trace functional (1 on diagonal units)."""
        vec = np.zeros(self.total_dim)
        for off, n in zip(self.hs_offsets, self.blocks):
            vec[off + np.arange(n) * (n + 1)] = 1.0
        return vec

    def __repr__(self) -> str:
        return f"AlgebraShape({list(self.blocks)})"


def tensor_shape(a: AlgebraShape, b: AlgebraShape) -> AlgebraShape:
    """Shape of the tensor product: blocks n_i * m_j in lexicographic (i, j) order."""
    return AlgebraShape(n * m for n in a.blocks for m in b.blocks)


def product_shape(factors: Sequence[AlgebraShape]) -> AlgebraShape:
    if not factors:
        raise ValueError("empty factor list")
    return reduce(tensor_shape, factors)


def hs_kron_permutation(a: AlgebraShape, b: AlgebraShape) -> np.ndarray:
    """Permutation p with coeffs_product(x (x) y) = kron(coeffs(x), coeffs(y))[p].

    Documents the fixed basis convention of tensor products: the coefficient
    vector of the product algebra is a reshuffle of the Kronecker product of
    the factor coefficient vectors.
    """
    tb = b.total_dim
    offs_a, offs_b = a.hs_offsets, b.hs_offsets
    perm = np.empty(tensor_shape(a, b).total_dim, dtype=np.intp)
    pos = 0
    for i, n in enumerate(a.blocks):
        for j, m in enumerate(b.blocks):
            r1, r2, c1, c2 = np.ix_(
                np.arange(n), np.arange(m), np.arange(n), np.arange(m)
            )
            kron_idx = (offs_a[i] + r1 * n + c1) * tb + (offs_b[j] + r2 * m + c2)
            perm[pos : pos + (n * m) ** 2] = kron_idx.reshape(-1)
            pos += (n * m) ** 2
    return perm


class AlgebraElement:
    """Block-diagonal complex matrix over an :class:`AlgebraShape`.

    Immutable value; all arithmetic returns new elements.
    """

    __slots__ = ("shape", "blocks")

    def __init__(self, shape: AlgebraShape, blocks: Sequence[np.ndarray], *, _trust: bool = False):
        if _trust:
            self.shape = shape
            self.blocks = blocks
            return
        blocks = tuple(np.asarray(b, dtype=complex) for b in blocks)
        if len(blocks) != shape.num_blocks:
            raise ValueError(
                f"expected {shape.num_blocks} blocks, got {len(blocks)}"
            )
        for n, blk in zip(shape.blocks, blocks):
            if blk.shape != (n, n):
                raise ValueError(f"block of size {blk.shape} does not match {n}x{n}")
        blocks = tuple(b.copy() for b in blocks)
        for b in blocks:
            b.setflags(write=False)
        self.shape = shape
        self.blocks = blocks

    def block(self, i: int) -> np.ndarray:
        return self.blocks[i]

    def _binary(self, other: "AlgebraElement", op) -> "AlgebraElement":
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        if other.shape != self.shape:
            raise ValueError(f"shape mismatch: {self.shape} vs {other.shape}")
        return AlgebraElement(self.shape, [op(a, b) for a, b in zip(self.blocks, other.blocks)])

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __neg__(self):
        return AlgebraElement(self.shape, [-b for b in self.blocks])

    def __mul__(self, scalar):
        if isinstance(scalar, AlgebraElement):
            raise TypeError("use @ for the blockwise operator product")
        return AlgebraElement(self.shape, [scalar * b for b in self.blocks])

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def __matmul__(self, other):
        """Blockwise operator product."""
        return self._binary(other, np.matmul)

    def dagger(self) -> "AlgebraElement":
        return AlgebraElement(self.shape, [b.conj().T for b in self.blocks])

    def trace(self) -> complex:
        return complex(sum(np.trace(b) for b in self.blocks))

    def hs_inner(self, other: "AlgebraElement") -> complex:
        """Trace inner product tr(self^dag other); conjugate-linear in self."""
        if other.shape != self.shape:
            raise ValueError(f"shape mismatch: {self.shape} vs {other.shape}")
        return complex(
            sum(np.vdot(a, b) for a, b in zip(self.blocks, other.blocks))
        )

    def hs_norm(self) -> float:
        return math.sqrt(max(self.hs_inner(self).real, 0.0))

    def to_hs(self) -> np.ndarray:
        """Coefficient vector in the matrix-unit basis (block, row-major)."""
        return np.concatenate([b.reshape(-1) for b in self.blocks])

    def to_dense(self) -> np.ndarray:
        """Full block-diagonal matrix on the algebra's Hilbert space."""
        n = self.shape.hilbert_dim
        out = np.zeros((n, n), dtype=complex)
        pos = 0
        for blk in self.blocks:
            d = blk.shape[0]
            out[pos : pos + d, pos : pos + d] = blk
            pos += d
        return out

    def hermiticity_deviation(self) -> float:
        return max(float(np.abs(b - b.conj().T).max()) for b in self.blocks)

    def is_self_adjoint(self, tol: float = DEFAULT_ATOL) -> bool:
        return self.hermiticity_deviation() <= tol

    def is_virtual_state(self, tol: float = DEFAULT_ATOL) -> bool:
        """Self-adjoint with unit trace; positivity not required."""
        return self.is_self_adjoint(tol) and abs(self.trace() - 1.0) <= tol

    def is_state(self, tol: float = DEFAULT_ATOL) -> bool:
        if not self.is_virtual_state(tol):
            return False
        return spectrum(self, tol=tol)[0] >= -tol

    def is_unitary(self, tol: float = DEFAULT_ATOL) -> bool:
        return all(
            np.abs(b.conj().T @ b - np.eye(b.shape[0])).max() <= tol
            for b in self.blocks
        )

    def __repr__(self) -> str:
        return f"AlgebraElement(shape={list(self.shape.blocks)}, trace={self.trace():.4g})"


def from_hs(shape: AlgebraShape, vec: np.ndarray) -> AlgebraElement:
    """Inverse of :meth:`AlgebraElement.to_hs`."""
    vec = np.asarray(vec, dtype=complex).reshape(-1)
    if vec.size != shape.total_dim:
        raise ValueError(f"vector of length {vec.size} does not match {shape}")
    blocks = [vec[shape.hs_slice(b)].reshape(n, n) for b, n in enumerate(shape.blocks)]
    return AlgebraElement(shape, blocks)


def zero_element(shape: AlgebraShape) -> AlgebraElement:
    return AlgebraElement(shape, [np.zeros((n, n), dtype=complex) for n in shape.blocks])


def identity_element(shape: AlgebraShape) -> AlgebraElement:
    return AlgebraElement(shape, [np.eye(n, dtype=complex) for n in shape.blocks])


def basis_element(shape: AlgebraShape, index: int) -> AlgebraElement:
    """The index-th matrix unit in the fixed coordinate order."""
    vec = np.zeros(shape.total_dim)
    vec[index] = 1.0
    return from_hs(shape, vec)


def classical_state(probabilities: Sequence[float]) -> AlgebraElement:
    """Probability vector as a state on the classical algebra with one block per outcome."""
    p = np.asarray(probabilities, dtype=float)
    shape = AlgebraShape([1] * p.size)
    return AlgebraElement(shape, [np.array([[v]], dtype=complex) for v in p])


def delta_state(shape: AlgebraShape, outcome: int) -> AlgebraElement:
    """Point-mass state on a classical algebra."""
    if not shape.is_classical:
        raise ValueError("delta states live on classical algebras")
    return basis_element(shape, outcome)


def spectrum(a: AlgebraElement, tol: float = DEFAULT_ATOL) -> np.ndarray:
    """Ascending eigenvalues of a self-adjoint element, all blocks merged."""
    dev = a.hermiticity_deviation()
    if dev > tol:
        raise ValueError(f"element is not self-adjoint (deviation {dev:.3g})")
    vals = np.concatenate([np.linalg.eigvalsh(b) for b in a.blocks])
    return np.sort(vals)


def max_abs_diff(a: AlgebraElement, b: AlgebraElement) -> float:
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return max(float(np.abs(x - y).max()) for x, y in zip(a.blocks, b.blocks))


# ---------------------------------------------------------------------------
# random generators (deterministic given a seed)
# ---------------------------------------------------------------------------


def _ginibre(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def random_element(shape: AlgebraShape, seed=None) -> AlgebraElement:
    rng = as_rng(seed)
    return AlgebraElement(shape, [_ginibre(rng, n, n) for n in shape.blocks])


def random_hermitian(shape: AlgebraShape, seed=None) -> AlgebraElement:
    rng = as_rng(seed)
    blocks = []
    for n in shape.blocks:
        g = _ginibre(rng, n, n)
        blocks.append((g + g.conj().T) / 2)
    return AlgebraElement(shape, blocks)


def random_state(shape: AlgebraShape, seed=None) -> AlgebraElement:
    """Random density operator: normalized Gram blocks with random block weights."""
    rng = as_rng(seed)
    raw = []
    for n in shape.blocks:
        g = _ginibre(rng, n, n)
        raw.append(g @ g.conj().T)
    weights = rng.random(shape.num_blocks) + 0.1
    weights = weights / weights.sum()
    blocks = [w * b / np.trace(b).real for w, b in zip(weights, raw)]
    return AlgebraElement(shape, blocks)


def random_faithful_state(shape: AlgebraShape, seed=None, mix: float = 0.25) -> AlgebraElement:
    """Random full-rank state: convex mixture with the maximally mixed state."""
    rho = random_state(shape, seed)
    mixed = identity_element(shape) / shape.hilbert_dim
    return (1.0 - mix) * rho + mix * mixed


def random_virtual_state(shape: AlgebraShape, seed=None, skew: float = 0.5) -> AlgebraElement:
    """Self-adjoint unit-trace element that is generically not positive."""
    rng = as_rng(seed)
    rho = random_state(shape, rng)
    h = random_hermitian(shape, rng)
    h = h - (h.trace().real / shape.hilbert_dim) * identity_element(shape)
    return rho + skew * h


def haar_unitary(shape: AlgebraShape, seed=None) -> AlgebraElement:
    """Blockwise Haar-random unitary via QR with phase-fixed diagonal."""
    rng = as_rng(seed)
    blocks = []
    for n in shape.blocks:
        q, r = np.linalg.qr(_ginibre(rng, n, n))
        d = np.diag(r)
        blocks.append(q * (d / np.abs(d)))
    return AlgebraElement(shape, blocks)


# ---------------------------------------------------------------------------
# elements of tensor products
# ---------------------------------------------------------------------------


class FactoredElement:
    """Element of a tensor product of algebras, tagged with its factor list.

    The data is the flattened element over the product shape (one block per
    tuple of factor blocks, lexicographic); the factor list makes partial
    traces well-defined.
    """

    __slots__ = ("factors", "element")

    def __init__(self, factors: Sequence[AlgebraShape], element: AlgebraElement):
        factors = tuple(factors)
        if not factors:
            raise ValueError("a factored element needs at least one factor")
        if element.shape != product_shape(factors):
            raise ValueError(
                f"element shape {element.shape} does not match product of {list(factors)}"
            )
        self.factors = factors
        self.element = element

    @classmethod
    def from_element(cls, element: AlgebraElement) -> "FactoredElement":
        return cls((element.shape,), element)

    @property
    def num_factors(self) -> int:
        return len(self.factors)

    @property
    def product(self) -> AlgebraShape:
        return self.element.shape

    def flatten(self) -> AlgebraElement:
        return self.element

    def as_element(self) -> AlgebraElement:
        if len(self.factors) != 1:
            raise ValueError("as_element requires a single factor")
        return self.element

    def with_factors(self, factors: Sequence[AlgebraShape]) -> "FactoredElement":
        """Relabel the factor grouping; the flat product shape must be unchanged."""
        return FactoredElement(factors, self.element)

    def block_tuples(self) -> Iterator[tuple[int, tuple[int, ...]]]:
        """Yield (flat block index, tuple of factor block indices) in order."""
        ranges = [range(f.num_blocks) for f in self.factors]
        for flat, tup in enumerate(itertools.product(*ranges)):
            yield flat, tup

    def tuple_block(self, tup: Sequence[int]) -> np.ndarray:
        flat = 0
        for f, b in zip(self.factors, tup):
            flat = flat * f.num_blocks + b
        return self.element.blocks[flat]

    def trace(self) -> complex:
        return self.element.trace()

    def dagger(self) -> "FactoredElement":
        return FactoredElement(self.factors, self.element.dagger())

    def __add__(self, other: "FactoredElement") -> "FactoredElement":
        if self.factors != other.factors:
            raise ValueError("factor lists differ")
        return FactoredElement(self.factors, self.element + other.element)

    def __sub__(self, other: "FactoredElement") -> "FactoredElement":
        if self.factors != other.factors:
            raise ValueError("factor lists differ")
        return FactoredElement(self.factors, self.element - other.element)

    def __mul__(self, scalar):
        return FactoredElement(self.factors, self.element * scalar)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        dims = [list(f.blocks) for f in self.factors]
        return f"FactoredElement(factors={dims})"


def tensor_elements(x: FactoredElement, y: FactoredElement) -> FactoredElement:
    """Tensor product; blocks are Kronecker products in lexicographic tuple order."""
    blocks = [
        np.kron(a, b)
        for a in x.element.blocks
        for b in y.element.blocks
    ]
    shape = tensor_shape(x.product, y.product)
    return FactoredElement(x.factors + y.factors, AlgebraElement(shape, blocks))


def tensor_many(elements: Sequence[FactoredElement]) -> FactoredElement:
    return reduce(tensor_elements, elements)


def partial_trace(x: FactoredElement, keep: Iterable[int]) -> FactoredElement:
    """Trace out every factor not in ``keep``; kept factors stay in their order."""
    keep = sorted(set(keep))
    n = x.num_factors
    if not keep:
        raise ValueError("keep set must be non-empty")
    if keep[0] < 0 or keep[-1] >= n:
        raise ValueError(f"keep indices {keep} out of range for {n} factors")
    if len(keep) == n:
        return x

    kept_factors = [x.factors[i] for i in keep]
    out_shape = product_shape(kept_factors)
    out_blocks = [
        np.zeros((d, d), dtype=complex) for d in out_shape.blocks
    ]
    kept_radix = [f.num_blocks for f in kept_factors]

    for _, tup in x.block_tuples():
        dims = [x.factors[i].blocks[b] for i, b in enumerate(tup)]
        block = x.tuple_block(tup).reshape(dims + dims)
        # einsum with integer subscripts: traced legs share an index with
        # their column partner, kept legs stay free
        row_idx = list(range(n))
        col_idx = [i if i not in keep else n + i for i in range(n)]
        out_idx = [i for i in keep] + [n + i for i in keep]
        reduced = np.einsum(block, row_idx + col_idx, out_idx)
        d_kept = int(np.prod([dims[i] for i in keep])) if keep else 1
        reduced = reduced.reshape(d_kept, d_kept)

        out_flat = 0
        for r, i in zip(kept_radix, keep):
            out_flat = out_flat * r + tup[i]
        out_blocks[out_flat] += reduced

    return FactoredElement(kept_factors, AlgebraElement(out_shape, out_blocks))
