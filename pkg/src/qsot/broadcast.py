"""Multiplication maps, the factor-swap operator, and canonical broadcasting.

The broadcasting map sends an operator A to the average of the two adjoints
of multiplication, which on a matrix algebra is half the anti-commutator of
(A tensor 1) with the factor-swap operator.  It is trace- and hermiticity-
preserving but not completely positive, which is the source of the negative
eigenvalues of states over time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import (
    AlgebraElement,
    AlgebraShape,
    FactoredElement,
    as_rng,
    basis_element,
    haar_unitary,
    hs_kron_permutation,
    random_element,
    tensor_shape,
)
from .chanmap import LinearOperatorMap, decoherence_map, tensor_maps

__all__ = [
    "mu_map",
    "mu_tilde_map",
    "swap_element",
    "broadcast_map",
    "broadcast_anticommutator",
    "classical_broadcast",
    "BroadcastAxiomsReport",
    "check_broadcast_axioms",
]


def _split_coord(shape: AlgebraShape, k: int) -> tuple[int, int, int]:
    """Decompose a flat coordinate index into (block, row, col)."""
    for b, (off, n) in enumerate(zip(shape.hs_offsets, shape.blocks)):
        if k < off + n * n:
            r, c = divmod(k - off, n)
            return b, r, c
    raise IndexError(k)


def _multiplication_matrix(shape: AlgebraShape, reverse: bool) -> np.ndarray:
    """Matrix of (A1 (x) A2) -> A1 A2 (or A2 A1) on the product coordinates."""
    prod = tensor_shape(shape, shape)
    perm = hs_kron_permutation(shape, shape)
    tot = shape.total_dim
    m = np.zeros((shape.total_dim, prod.total_dim), dtype=complex)
    for p in range(prod.total_dim):
        ka, kb = divmod(int(perm[p]), tot)
        b, i, j = _split_coord(shape, ka)
        c, k, l = _split_coord(shape, kb)
        if b != c:
            continue
        # E_ij E_kl = delta(j,k) E_il within a block
        if not reverse and j == k:
            m[shape.hs_index(b, i, l), p] = 1.0
        if reverse and l == i:
            m[shape.hs_index(b, k, j), p] = 1.0
    return m


def mu_map(shape: AlgebraShape) -> LinearOperatorMap:
    """Linear extension of A1 (x) A2 -> A1 A2."""
    prod = tensor_shape(shape, shape)
    return LinearOperatorMap(prod, shape, _multiplication_matrix(shape, reverse=False))


def mu_tilde_map(shape: AlgebraShape) -> LinearOperatorMap:
    """Linear extension of A1 (x) A2 -> A2 A1."""
    prod = tensor_shape(shape, shape)
    return LinearOperatorMap(prod, shape, _multiplication_matrix(shape, reverse=True))


def swap_element(shape: AlgebraShape) -> FactoredElement:
    """Factor-swap operator of a matrix algebra: sum of E_ij (x) E_ji."""
    if not shape.is_matrix_algebra:
        raise ValueError("the swap operator is a single matrix only on matrix algebras")
    d = shape.blocks[0]
    eye = np.eye(d)
    swap = np.einsum("il,jk->ijkl", eye, eye).reshape(d * d, d * d)
    prod = tensor_shape(shape, shape)
    return FactoredElement((shape, shape), AlgebraElement(prod, [swap]))


def broadcast_map(shape: AlgebraShape) -> LinearOperatorMap:
    """Canonical broadcasting: the average of the adjoints of both multiplications."""
    mu_star = mu_map(shape).hs_adjoint()
    mu_tilde_star = mu_tilde_map(shape).hs_adjoint()
    prod = tensor_shape(shape, shape)
    return LinearOperatorMap(shape, prod, 0.5 * (mu_star.matrix + mu_tilde_star.matrix))


def broadcast_anticommutator(a: AlgebraElement) -> FactoredElement:
    """Blockwise closed form: half the anti-commutator of (A (x) 1) with the swap.

    Agrees with :func:`broadcast_map` on every shape; only the diagonal
    block pairs of the product carry data.
    """
    shape = a.shape
    prod = tensor_shape(shape, shape)
    blocks = [np.zeros((d, d), dtype=complex) for d in prod.blocks]
    k = shape.num_blocks
    for b, n in enumerate(shape.blocks):
        swap = swap_element(AlgebraShape([n])).flatten().blocks[0]
        a_kron_1 = np.kron(a.blocks[b], np.eye(n))
        blocks[b * k + b] = 0.5 * (a_kron_1 @ swap + swap @ a_kron_1)
    return FactoredElement((shape, shape), AlgebraElement(prod, blocks))


def classical_broadcast(shape: AlgebraShape) -> LinearOperatorMap:
    """Copy map of a classical algebra: point masses go to their double."""
    if not shape.is_classical:
        raise ValueError("classical broadcasting needs an all-ones shape")
    n = shape.num_blocks
    m = np.zeros((n * n, n), dtype=complex)
    for x in range(n):
        m[x * n + x, x] = 1.0
    return LinearOperatorMap(shape, tensor_shape(shape, shape), m)


@dataclass(frozen=True)
class BroadcastAxiomsReport:
    """Worst deviations from the three characterizing conditions."""

    shape: AlgebraShape
    trials: int
    covariance_deviation: float
    permutation_deviation: float
    classical_deviation: float
    tol: float

    @property
    def max_deviation(self) -> float:
        return max(
            self.covariance_deviation,
            self.permutation_deviation,
            self.classical_deviation,
        )

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tol


def check_broadcast_axioms(
    shape: AlgebraShape,
    trials: int = 100,
    seed=None,
    tol: float = 1e-10,
) -> BroadcastAxiomsReport:
    """Exercise unitary covariance, swap invariance, and classical consistency.

    Restricted to matrix algebras, where the swap operator and the diagonal
    subalgebra are available.
    """
    if not shape.is_matrix_algebra:
        raise ValueError("axiom checks are defined on matrix algebras")
    rng = as_rng(seed)
    d = shape.blocks[0]
    bmap = broadcast_map(shape)
    swap = swap_element(shape).flatten().blocks[0]

    cov_dev = 0.0
    perm_dev = 0.0
    for _ in range(trials):
        u = haar_unitary(shape, rng).blocks[0]
        a = random_element(shape, rng).blocks[0]
        elem = AlgebraElement(shape, [a])
        lhs = bmap.apply(AlgebraElement(shape, [u @ a @ u.conj().T])).blocks[0]
        uu = np.kron(u, u)
        rhs = uu @ bmap.apply(elem).blocks[0] @ uu.conj().T
        cov_dev = max(cov_dev, float(np.abs(lhs - rhs).max()))

        img = bmap.apply(elem).blocks[0]
        perm_dev = max(perm_dev, float(np.abs(swap @ img @ swap - img).max()))

    # classical consistency: decohere, broadcast, decohere both legs; on the
    # diagonal subalgebra this must equal the classical copy map
    dec = decoherence_map(shape)
    dec2 = tensor_maps(dec, dec)
    cls_dev = 0.0
    for x in range(d):
        unit = basis_element(shape, shape.hs_index(0, x, x))
        lhs = dec2.apply(bmap.apply(dec.apply(unit))).blocks[0]
        expected = np.zeros((d * d, d * d), dtype=complex)
        expected[x * d + x, x * d + x] = 1.0
        cls_dev = max(cls_dev, float(np.abs(lhs - expected).max()))

    return BroadcastAxiomsReport(shape, trials, cov_dev, perm_dev, cls_dev, tol)
