"""Blooms: maps that attach a channel's output correlations to its input.

The single-map bloom composes canonical broadcasting with the channel on the
second leg.  Chains of channels bloom into maps from the initial algebra to
the full tensor product, either by the right-nested recursion or by repeatedly
attaching one factor at a time (the left-nested closed form); every complete
parenthesization of the target product gives an equivalent expression, and
all of them are exposed here for cross-checking.

The work happens in :func:`bloom_step`, which attaches one factor to a
factored element without materializing any operator on the doubled product
algebra: writing broadcasting as half the anti-commutator with the factor
swap turns the step into a small tensor contraction against the channel's
action on matrix units of the last factor.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache
from math import comb
from typing import Sequence

import numpy as np

from .algebra import (
    AlgebraElement,
    AlgebraShape,
    FactoredElement,
    basis_element,
    product_shape,
    tensor_shape,
)
from .chanmap import Chain, LinearOperatorMap, identity_map, is_tp

__all__ = [
    "bloom_step",
    "bloom_apply",
    "bloom1",
    "bloom_chain_recursive",
    "bloom_chain_closed",
    "ParenTree",
    "all_parenthesizations",
    "right_comb",
    "left_comb",
    "catalan",
    "bloom_tree",
]


def _unit_action_tensor(
    e: LinearOperatorMap, src_block: int, tgt_block: int
) -> np.ndarray:
    """T[b, a, r, c] = (e applied to the unit E_ba of src_block)[r, c] in tgt_block."""
    d = e.source.blocks[src_block]
    m = e.target.blocks[tgt_block]
    sub = e.matrix[e.target.hs_slice(tgt_block), e.source.hs_slice(src_block)]
    return sub.reshape(m, m, d, d).transpose(2, 3, 0, 1)


def bloom_step(x: FactoredElement, e: LinearOperatorMap) -> FactoredElement:
    """Attach one factor: bloom of (e after the trace onto the last factor).

    ``e`` must consume the last factor of ``x``.  With a single factor the
    trace is the identity, so this is the plain bloom of ``e`` applied to x.
    """
    if e.source != x.factors[-1]:
        raise ValueError(
            f"map source {e.source} does not match last factor {x.factors[-1]}"
        )
    out_factors = x.factors + (e.target,)
    out_shape = product_shape(out_factors)
    n_tgt = e.target.num_blocks
    out_blocks: list[np.ndarray | None] = [None] * out_shape.num_blocks

    for flat, tup in x.block_tuples():
        dims = [x.factors[i].blocks[b] for i, b in enumerate(tup)]
        d = dims[-1]
        d_head = int(np.prod(dims[:-1], dtype=np.int64)) if len(dims) > 1 else 1
        x4 = x.element.blocks[flat].reshape(d_head, d, d_head, d)
        for beta in range(n_tgt):
            m = e.target.blocks[beta]
            t4 = _unit_action_tensor(e, tup[-1], beta)
            # half the anti-commutator with the swap, fused with the channel:
            # rows (C, x, r), cols (D, w, z); the traced legs collapse to a
            # single contraction over the last-factor index
            term1 = np.einsum("CxDy,wyrz->CxrDwz", x4, t4)
            term2 = np.einsum("CyDw,yxrz->CxrDwz", x4, t4)
            dm = d_head * d * m
            out_blocks[flat * n_tgt + beta] = (
                0.5 * (term1 + term2).reshape(dm, dm)
            )

    elem = AlgebraElement(out_shape, out_blocks)
    return FactoredElement(out_factors, elem)


def bloom_apply(chain: Chain, rho: AlgebraElement) -> FactoredElement:
    """Evaluate the chain bloom on an element by attaching factors left to right."""
    if rho.shape != chain.algebras[0]:
        raise ValueError("initial element does not live in the chain's first algebra")
    acc = FactoredElement.from_element(rho)
    for m in chain.maps:
        acc = bloom_step(acc, m)
    return acc


def bloom1(e: LinearOperatorMap, warn_non_tp: bool = True) -> LinearOperatorMap:
    """Bloom of a single map: broadcast, then apply the map on the second leg."""
    if warn_non_tp:
        ok, dev = is_tp(e)
        if not ok:
            warnings.warn(
                f"blooming a map that is not trace-preserving (deviation {dev:.3g})",
                stacklevel=2,
            )
    target = tensor_shape(e.source, e.target)
    cols = np.empty((target.total_dim, e.source.total_dim), dtype=complex)
    for k in range(e.source.total_dim):
        x = FactoredElement.from_element(basis_element(e.source, k))
        cols[:, k] = bloom_step(x, e).flatten().to_hs()
    return LinearOperatorMap(e.source, target, cols)


def bloom_chain_recursive(chain: Chain) -> LinearOperatorMap:
    """Right-nested chain bloom: bloom of (bloom of the tail, after the head)."""
    if len(chain) == 1:
        return bloom1(chain.maps[0], warn_non_tp=False)
    tail = bloom_chain_recursive(chain[1:])
    return bloom1(tail @ chain.maps[0], warn_non_tp=False)


def bloom_chain_closed(chain: Chain) -> LinearOperatorMap:
    """Left-nested chain bloom: attach one factor per step, evaluated columnwise."""
    source = chain.algebras[0]
    target = product_shape(chain.algebras)
    cols = np.empty((target.total_dim, source.total_dim), dtype=complex)
    for k in range(source.total_dim):
        cols[:, k] = bloom_apply(chain, basis_element(source, k)).flatten().to_hs()
    return LinearOperatorMap(source, target, cols)


# ---------------------------------------------------------------------------
# general parenthesizations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ParenTree:
    """Full binary tree; leaves, left to right, are the factors of the product."""

    left: "ParenTree | None" = None
    right: "ParenTree | None" = None

    def __post_init__(self):
        if (self.left is None) != (self.right is None):
            raise ValueError("a node has either two children or none")

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    @property
    def num_leaves(self) -> int:
        if self.is_leaf:
            return 1
        return self.left.num_leaves + self.right.num_leaves


LEAF = ParenTree()


def catalan(n: int) -> int:
    return comb(2 * n, n) // (n + 1)


@lru_cache(maxsize=None)
def _trees(n_leaves: int) -> tuple[ParenTree, ...]:
    if n_leaves == 1:
        return (LEAF,)
    out = []
    for k in range(1, n_leaves):
        for lt in _trees(k):
            for rt in _trees(n_leaves - k):
                out.append(ParenTree(lt, rt))
    return tuple(out)


def all_parenthesizations(n_leaves: int) -> tuple[ParenTree, ...]:
    """Every full binary tree on the given leaves; there are catalan(n-1) of them."""
    if n_leaves < 1:
        raise ValueError("need at least one leaf")
    return _trees(n_leaves)


def right_comb(n_leaves: int) -> ParenTree:
    t = LEAF
    for _ in range(n_leaves - 1):
        t = ParenTree(LEAF, t)
    return t


def left_comb(n_leaves: int) -> ParenTree:
    t = LEAF
    for _ in range(n_leaves - 1):
        t = ParenTree(t, LEAF)
    return t


def _tree_apply(
    tree: ParenTree,
    algebras: Sequence[AlgebraShape],
    maps: Sequence[LinearOperatorMap],
    x: FactoredElement,
) -> FactoredElement:
    """Evaluate the tree-shaped bloom on an element of the first algebra."""
    if tree.is_leaf:
        return x
    k = tree.left.num_leaves  # left subtree covers algebras[0:k]
    xl = _tree_apply(tree.left, algebras[:k], maps[: k - 1], x)
    g = _tree_map(tree.right, algebras[k:], maps[k:])
    step = g @ maps[k - 1]
    out = bloom_step(xl, step)
    return out.with_factors(tuple(algebras))


def _tree_map(
    tree: ParenTree,
    algebras: Sequence[AlgebraShape],
    maps: Sequence[LinearOperatorMap],
) -> LinearOperatorMap:
    if tree.is_leaf:
        return identity_map(algebras[0])
    source = algebras[0]
    target = product_shape(algebras)
    cols = np.empty((target.total_dim, source.total_dim), dtype=complex)
    for i in range(source.total_dim):
        x = FactoredElement.from_element(basis_element(source, i))
        cols[:, i] = _tree_apply(tree, algebras, maps, x).flatten().to_hs()
    return LinearOperatorMap(source, target, cols)


def bloom_tree(chain: Chain, tree: ParenTree) -> LinearOperatorMap:
    """Chain bloom evaluated along an arbitrary parenthesization of the target.

    The right comb reproduces the recursive form and the left comb the closed
    form; all trees agree, which the test suite checks pairwise.
    """
    algebras = chain.algebras
    if tree.num_leaves != len(algebras):
        raise ValueError(
            f"tree has {tree.num_leaves} leaves but the chain spans {len(algebras)} algebras"
        )
    return _tree_map(tree, algebras, chain.maps)
