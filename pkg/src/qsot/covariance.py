"""Structure-preserving relabelings of algebras and the covariance checks.

A *-isomorphism between block algebras is a permutation matching blocks of
equal dimension composed with a unitary conjugation inside each block; that
classified form is fully general in finite dimensions.  Tensor products of
isomorphisms act tuple-blockwise, so they apply to factored elements without
ever materializing an operator on the product algebra.

The executable covariance checks compare, entrywise on a spanning basis,
the two sides of each invariance statement: broadcasting, single blooms,
whole chains, and the states over time they generate.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from .algebra import (
    AlgebraElement,
    AlgebraShape,
    FactoredElement,
    as_rng,
    basis_element,
    haar_unitary,
    max_abs_diff,
    product_shape,
    random_element,
)
from .bloom import bloom_apply, bloom_step
from .broadcast import broadcast_map
from .chanmap import Chain, LinearOperatorMap, map_from_action
from .sot import star

__all__ = [
    "StarIsomorphism",
    "identity_iso",
    "random_iso",
    "tensor_iso",
    "check_star_isomorphism",
    "conjugate_chain",
    "CovarianceReport",
    "check_broadcast_covariance",
    "check_bloom_covariance",
    "ChainCovarianceReport",
    "check_chain_covariance",
]


@dataclass(frozen=True, eq=False)
class StarIsomorphism:
    """Block permutation plus per-block unitaries between algebras of equal type.

    ``block_perm[s]`` is the target block receiving source block ``s``;
    ``unitaries[t]`` conjugates the block arriving at target block ``t``.
    """

    source: AlgebraShape
    target: AlgebraShape
    block_perm: tuple[int, ...]
    unitaries: tuple[np.ndarray, ...]

    def __post_init__(self):
        if sorted(self.source.blocks) != sorted(self.target.blocks):
            raise ValueError("source and target must have matching block multisets")
        perm = tuple(int(p) for p in self.block_perm)
        if sorted(perm) != list(range(self.source.num_blocks)):
            raise ValueError(f"not a block permutation: {perm}")
        for s, t in enumerate(perm):
            if self.source.blocks[s] != self.target.blocks[t]:
                raise ValueError(
                    f"block {s} (dim {self.source.blocks[s]}) cannot map to "
                    f"block {t} (dim {self.target.blocks[t]})"
                )
        us = tuple(np.asarray(u, dtype=complex) for u in self.unitaries)
        if len(us) != self.target.num_blocks:
            raise ValueError("need one unitary per target block")
        for t, u in enumerate(us):
            n = self.target.blocks[t]
            if u.shape != (n, n):
                raise ValueError(f"unitary {t} has shape {u.shape}, expected {n}x{n}")
            if np.abs(u.conj().T @ u - np.eye(n)).max() > 1e-8:
                raise ValueError(f"matrix for target block {t} is not unitary")
        object.__setattr__(self, "block_perm", perm)
        object.__setattr__(self, "unitaries", us)

    @property
    def inverse_perm(self) -> tuple[int, ...]:
        inv = [0] * len(self.block_perm)
        for s, t in enumerate(self.block_perm):
            inv[t] = s
        return tuple(inv)

    def apply(self, a: AlgebraElement) -> AlgebraElement:
        if a.shape != self.source:
            raise ValueError(f"element over {a.shape} fed to isomorphism from {self.source}")
        inv = self.inverse_perm
        blocks = []
        for t in range(self.target.num_blocks):
            u = self.unitaries[t]
            blocks.append(u @ a.blocks[inv[t]] @ u.conj().T)
        return AlgebraElement(self.target, blocks)

    def apply_factored(self, x: FactoredElement, target_factors=None) -> FactoredElement:
        out = self.apply(x.flatten())
        factors = (self.target,) if target_factors is None else tuple(target_factors)
        return FactoredElement(factors, out)

    def inverse(self) -> "StarIsomorphism":
        # target block s of the inverse is source block s here, so it undoes
        # the unitary that block s received on its way to block_perm[s]
        inv = self.inverse_perm
        units = tuple(
            self.unitaries[self.block_perm[s]].conj().T
            for s in range(len(inv))
        )
        return StarIsomorphism(self.target, self.source, inv, units)

    def as_map(self) -> LinearOperatorMap:
        return map_from_action(self.source, self.target, self.apply)

    def compose(self, other: "StarIsomorphism") -> "StarIsomorphism":
        """self o other."""
        if other.target != self.source:
            raise ValueError("isomorphisms do not compose")
        perm = tuple(self.block_perm[t] for t in other.block_perm)
        units = []
        for t in range(self.target.num_blocks):
            units.append(self.unitaries[t] @ other.unitaries[self.inverse_perm[t]])
        return StarIsomorphism(other.source, self.target, perm, tuple(units))

    def __repr__(self) -> str:
        return (
            f"StarIsomorphism({list(self.source.blocks)} -> {list(self.target.blocks)}, "
            f"perm={list(self.block_perm)})"
        )


def identity_iso(shape: AlgebraShape) -> StarIsomorphism:
    return StarIsomorphism(
        shape,
        shape,
        tuple(range(shape.num_blocks)),
        tuple(np.eye(n, dtype=complex) for n in shape.blocks),
    )


def random_iso(
    shape: AlgebraShape, seed=None, permute_blocks: bool = True
) -> StarIsomorphism:
    """Haar unitaries per block, plus a random relabeling among the blocks.

    The target shape lists the permuted blocks, so the permutation may be
    non-trivial even when all block dimensions differ.
    """
    rng = as_rng(seed)
    k = shape.num_blocks
    if permute_blocks and k > 1:
        perm = tuple(int(p) for p in rng.permutation(k))
    else:
        perm = tuple(range(k))
    target_blocks = [0] * k
    for s, t in enumerate(perm):
        target_blocks[t] = shape.blocks[s]
    target = AlgebraShape(target_blocks)
    units = tuple(haar_unitary(AlgebraShape([n]), rng).blocks[0] for n in target.blocks)
    return StarIsomorphism(shape, target, perm, units)


def tensor_iso(isos: Sequence[StarIsomorphism]) -> StarIsomorphism:
    """Factorwise isomorphism of the product algebras, in classified form.

    Tuple blocks permute factor by factor and the per-block unitaries are
    Kronecker products, so application stays cheap on large products.
    """
    isos = list(isos)
    if not isos:
        raise ValueError("empty isomorphism list")
    source = product_shape([p.source for p in isos])
    target = product_shape([p.target for p in isos])
    src_radix = [p.source.num_blocks for p in isos]
    tgt_radix = [p.target.num_blocks for p in isos]

    perm = []
    for tup in itertools.product(*[range(r) for r in src_radix]):
        flat_t = 0
        for p, r, b in zip(isos, tgt_radix, tup):
            flat_t = flat_t * r + p.block_perm[b]
        perm.append(flat_t)

    units: list[np.ndarray | None] = [None] * target.num_blocks
    for tup in itertools.product(*[range(r) for r in tgt_radix]):
        flat_t = 0
        for r, b in zip(tgt_radix, tup):
            flat_t = flat_t * r + b
        units[flat_t] = reduce(np.kron, [p.unitaries[b] for p, b in zip(isos, tup)])

    return StarIsomorphism(source, target, tuple(perm), tuple(units))


@dataclass(frozen=True)
class IsoCheckReport:
    multiplicativity: float
    dagger: float
    trace: float
    round_trip: float
    tol: float

    @property
    def max_deviation(self) -> float:
        return max(self.multiplicativity, self.dagger, self.trace, self.round_trip)

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tol


def check_star_isomorphism(
    phi: StarIsomorphism, trials: int = 20, seed=None, tol: float = 1e-10
) -> IsoCheckReport:
    """Spot-check that the map preserves products, adjoints, and traces."""
    rng = as_rng(seed)
    mult = dag = tr = rt = 0.0
    for _ in range(trials):
        a = random_element(phi.source, rng)
        b = random_element(phi.source, rng)
        mult = max(mult, max_abs_diff(phi.apply(a @ b), phi.apply(a) @ phi.apply(b)))
        dag = max(dag, max_abs_diff(phi.apply(a.dagger()), phi.apply(a).dagger()))
        tr = max(tr, abs(phi.apply(a).trace() - a.trace()))
        rt = max(rt, max_abs_diff(phi.inverse().apply(phi.apply(a)), a))
    return IsoCheckReport(mult, dag, tr, rt, tol)


def conjugate_chain(chain: Chain, isos: Sequence[StarIsomorphism]) -> Chain:
    """Relabel every step: the i-th map becomes iso_i o map_i o iso_{i-1}^{-1}."""
    isos = list(isos)
    if len(isos) != len(chain) + 1:
        raise ValueError(f"need {len(chain) + 1} isomorphisms, got {len(isos)}")
    for iso, alg in zip(isos, chain.algebras):
        if iso.source != alg:
            raise ValueError("isomorphism sources misaligned with chain algebras")
    maps = []
    for i, m in enumerate(chain.maps):
        maps.append(isos[i + 1].as_map() @ m @ isos[i].inverse().as_map())
    return Chain(maps)


@dataclass(frozen=True)
class CovarianceReport:
    hypothesis_deviation: float
    conclusion_deviation: float
    tol: float

    @property
    def vacuous(self) -> bool:
        return self.hypothesis_deviation > self.tol

    @property
    def passed(self) -> bool:
        return not self.vacuous and self.conclusion_deviation <= self.tol


def check_broadcast_covariance(
    phi: StarIsomorphism, tol: float = 1e-10
) -> CovarianceReport:
    """Broadcasting commutes with relabeling: broadcast after phi equals
    (phi tensor phi) after broadcast, compared on the whole source basis."""
    bsrc = broadcast_map(phi.source)
    btgt = broadcast_map(phi.target)
    phi2 = tensor_iso([phi, phi])
    dev = 0.0
    for k in range(phi.source.total_dim):
        e = basis_element(phi.source, k)
        lhs = btgt.apply(phi.apply(e))
        rhs = phi2.apply(bsrc.apply(e))
        dev = max(dev, max_abs_diff(lhs, rhs))
    return CovarianceReport(0.0, dev, tol)


def check_bloom_covariance(
    e: LinearOperatorMap,
    e_prime: LinearOperatorMap,
    phi: StarIsomorphism,
    psi: StarIsomorphism,
    tol: float = 1e-10,
) -> CovarianceReport:
    """If psi o e = e' o phi then (phi tensor psi) o bloom(e) = bloom(e') o phi.

    The hypothesis deviation is reported first; a violated hypothesis flags
    the conclusion as vacuous rather than asserting it.
    """
    hyp = 0.0
    con = 0.0
    phipsi = tensor_iso([phi, psi])
    for k in range(e.source.total_dim):
        x = basis_element(e.source, k)
        hyp = max(hyp, max_abs_diff(psi.apply(e.apply(x)), e_prime.apply(phi.apply(x))))
        lhs = phipsi.apply(
            bloom_step(FactoredElement.from_element(x), e).flatten()
        )
        rhs = bloom_step(
            FactoredElement.from_element(phi.apply(x)), e_prime
        ).flatten()
        con = max(con, max_abs_diff(lhs, rhs))
    return CovarianceReport(hyp, con, tol)


@dataclass(frozen=True)
class ChainCovarianceReport:
    state_deviation: float
    map_deviation: float
    intermediate_deviation: float | None
    tol: float

    @property
    def max_deviation(self) -> float:
        devs = [self.state_deviation, self.map_deviation]
        if self.intermediate_deviation is not None:
            devs.append(self.intermediate_deviation)
        return max(devs)

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tol


def check_chain_covariance(
    chain: Chain,
    isos: Sequence[StarIsomorphism],
    rho: AlgebraElement,
    tol: float = 1e-9,
    check_intermediate: bool = False,
) -> ChainCovarianceReport:
    """Relabeling every step algebra relabels the state over time.

    Checks the state-level identity for the given initial state, the map-level
    identity on the whole source basis, and optionally the ladder of
    intermediate identities used to prove it (one per chain suffix).
    """
    isos = list(isos)
    primed = conjugate_chain(chain, isos)
    big_iso = tensor_iso(isos)

    lhs_state = big_iso.apply(star(chain, rho).value.flatten())
    rhs_state = star(primed, isos[0].apply(rho)).value.flatten()
    state_dev = max_abs_diff(lhs_state, rhs_state)

    map_dev = 0.0
    src = chain.algebras[0]
    for k in range(src.total_dim):
        x = basis_element(src, k)
        lhs = big_iso.apply(bloom_apply(chain, x).flatten())
        rhs = bloom_apply(primed, isos[0].apply(x)).flatten()
        map_dev = max(map_dev, max_abs_diff(lhs, rhs))

    inter_dev = None
    if check_intermediate:
        inter_dev = 0.0
        for lvl in range(1, len(chain)):
            suffix = chain[lvl:]
            suffix_p = primed[lvl:]
            head, head_p = chain.maps[lvl - 1], primed.maps[lvl - 1]
            tail_iso = tensor_iso(isos[lvl:])
            src_lvl = chain.algebras[lvl - 1]
            for k in range(src_lvl.total_dim):
                x = basis_element(src_lvl, k)
                lhs = tail_iso.apply(bloom_apply(suffix, head.apply(x)).flatten())
                rhs = bloom_apply(
                    suffix_p, head_p.apply(isos[lvl - 1].apply(x))
                ).flatten()
                inter_dev = max(inter_dev, max_abs_diff(lhs, rhs))

    return ChainCovarianceReport(state_dev, map_dev, inter_dev, tol)
