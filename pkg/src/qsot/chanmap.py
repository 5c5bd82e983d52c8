"""Linear maps between block algebras: superoperator matrices, adjoints, and
the trace-preserving / hermitian-preserving / completely-positive predicates.

A map is stored as its matrix in the orthonormal matrix-unit bases of source
and target (see :mod:`qsot.algebra` for the basis order), so the adjoint with
respect to the trace inner product is the conjugate transpose.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .algebra import (
    DEFAULT_ATOL,
    AlgebraElement,
    AlgebraShape,
    FactoredElement,
    as_rng,
    basis_element,
    from_hs,
    hs_kron_permutation,
    identity_element,
    product_shape,
    tensor_shape,
    _ginibre,
)

__all__ = [
    "LinearOperatorMap",
    "Chain",
    "identity_map",
    "zero_map",
    "map_from_action",
    "compose",
    "tensor_maps",
    "tensor_many_maps",
    "ad_unitary",
    "decoherence_map",
    "classical_channel",
    "trace_functional",
    "trace_map",
    "PredicateResult",
    "MapClassification",
    "tp_deviation",
    "hp_deviation",
    "choi_blocks",
    "choi_min_eigenvalue",
    "is_tp",
    "is_hp",
    "is_cp",
    "is_cptp",
    "classify_map",
    "random_cptp",
    "random_hptp",
    "map_max_diff",
]


@dataclass(frozen=True, eq=False)
class LinearOperatorMap:
    """Linear map between algebras, as a matrix in the fixed coordinate bases."""

    source: AlgebraShape
    target: AlgebraShape
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.target.total_dim, self.source.total_dim):
            raise ValueError(
                f"matrix {m.shape} does not map {self.source} into {self.target}"
            )
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def apply(self, a: AlgebraElement) -> AlgebraElement:
        if a.shape != self.source:
            raise ValueError(f"element over {a.shape} fed to map from {self.source}")
        return from_hs(self.target, self.matrix @ a.to_hs())

    def apply_factored(self, x: FactoredElement, target_factors=None) -> FactoredElement:
        """Apply to the flattened element; reinterpret the result over target factors."""
        out = self.apply(x.flatten())
        factors = (self.target,) if target_factors is None else tuple(target_factors)
        return FactoredElement(factors, out)

    def __matmul__(self, other: "LinearOperatorMap") -> "LinearOperatorMap":
        """Composition self o other (other acts first)."""
        if other.target != self.source:
            raise ValueError(
                f"cannot compose: inner shapes {other.target} vs {self.source}"
            )
        return LinearOperatorMap(other.source, self.target, self.matrix @ other.matrix)

    def hs_adjoint(self) -> "LinearOperatorMap":
        """Adjoint for the trace inner product: the conjugate-transposed matrix."""
        return LinearOperatorMap(self.target, self.source, self.matrix.conj().T)

    def __repr__(self) -> str:
        return (
            f"LinearOperatorMap({list(self.source.blocks)} -> {list(self.target.blocks)})"
        )


def identity_map(shape: AlgebraShape) -> LinearOperatorMap:
    return LinearOperatorMap(shape, shape, np.eye(shape.total_dim, dtype=complex))


def zero_map(source: AlgebraShape, target: AlgebraShape) -> LinearOperatorMap:
    return LinearOperatorMap(source, target, np.zeros((target.total_dim, source.total_dim)))


def map_from_action(
    source: AlgebraShape,
    target: AlgebraShape,
    action: Callable[[AlgebraElement], AlgebraElement],
) -> LinearOperatorMap:
    """Materialize a linear action column by column on the source basis."""
    cols = np.empty((target.total_dim, source.total_dim), dtype=complex)
    for k in range(source.total_dim):
        cols[:, k] = action(basis_element(source, k)).to_hs()
    return LinearOperatorMap(source, target, cols)


def compose(f: LinearOperatorMap, g: LinearOperatorMap) -> LinearOperatorMap:
    """f o g."""
    return f @ g


def tensor_maps(f: LinearOperatorMap, g: LinearOperatorMap) -> LinearOperatorMap:
    """Map acting factorwise on the tensor product, in product coordinates."""
    src = tensor_shape(f.source, g.source)
    tgt = tensor_shape(f.target, g.target)
    kron = np.kron(f.matrix, g.matrix)
    ps = hs_kron_permutation(f.source, g.source)
    pt = hs_kron_permutation(f.target, g.target)
    return LinearOperatorMap(src, tgt, kron[np.ix_(pt, ps)])


def tensor_many_maps(maps: Sequence[LinearOperatorMap]) -> LinearOperatorMap:
    return reduce(tensor_maps, maps)


def ad_unitary(u: AlgebraElement, tol: float = DEFAULT_ATOL) -> LinearOperatorMap:
    """Conjugation A -> U A U^dag; always CPTP."""
    if not u.is_unitary(tol):
        raise ValueError("conjugation requires a unitary element")
    blocks = [np.kron(b, b.conj()) for b in u.blocks]
    total = u.shape.total_dim
    m = np.zeros((total, total), dtype=complex)
    for b, blk in enumerate(blocks):
        sl = u.shape.hs_slice(b)
        m[sl, sl] = blk
    return LinearOperatorMap(u.shape, u.shape, m)


def decoherence_map(shape: AlgebraShape) -> LinearOperatorMap:
    """Kill off-diagonal matrix entries of a single-block algebra; idempotent CPTP."""
    if not shape.is_matrix_algebra:
        raise ValueError("the decoherence map is defined on matrix algebras only")
    d = shape.blocks[0]
    diag = np.zeros(d * d)
    diag[np.arange(d) * (d + 1)] = 1.0
    return LinearOperatorMap(shape, shape, np.diag(diag).astype(complex))


def classical_channel(stochastic: np.ndarray, tol: float = DEFAULT_ATOL) -> LinearOperatorMap:
    """Column-stochastic matrix as a CPTP map between classical algebras."""
    s = np.asarray(stochastic, dtype=float)
    if s.ndim != 2:
        raise ValueError("expected a 2d stochastic matrix")
    if s.min() < -tol or s.max() > 1 + tol:
        raise ValueError("stochastic entries must lie in [0, 1]")
    colsums = s.sum(axis=0)
    if np.abs(colsums - 1.0).max() > tol:
        raise ValueError(f"columns must sum to 1 (max deviation {np.abs(colsums - 1).max():.3g})")
    ny, nx = s.shape
    return LinearOperatorMap(AlgebraShape([1] * nx), AlgebraShape([1] * ny), s.astype(complex))


def trace_functional(shape: AlgebraShape) -> LinearOperatorMap:
    """The trace as a map onto the one-dimensional algebra."""
    return LinearOperatorMap(shape, AlgebraShape([1]), shape.trace_vector()[None, :])


def trace_map(factors: Sequence[AlgebraShape]) -> LinearOperatorMap:
    """Partial trace of a tensor product onto its right-most factor."""
    factors = list(factors)
    if len(factors) < 2:
        raise ValueError("the universal partial trace needs at least 2 factors")
    head = trace_functional(product_shape(factors[:-1]))
    return tensor_maps(head, identity_map(factors[-1]))


# ---------------------------------------------------------------------------
# predicates
# ---------------------------------------------------------------------------


class PredicateResult(NamedTuple):
    ok: bool
    deviation: float


def tp_deviation(m: LinearOperatorMap) -> float:
    """Worst violation of trace preservation over the source basis."""
    lhs = m.target.trace_vector() @ m.matrix
    return float(np.abs(lhs - m.source.trace_vector()).max())


def hp_deviation(m: LinearOperatorMap) -> float:
    """Worst violation of hermiticity preservation over the source basis."""
    ps = m.source.dagger_permutation()
    pt = m.target.dagger_permutation()
    return float(np.abs(m.matrix - m.matrix[np.ix_(pt, ps)].conj()).max())


def choi_blocks(m: LinearOperatorMap) -> list[np.ndarray]:
    """One Choi operator per source block; all PSD iff the map is CP."""
    out = []
    nt = m.target.hilbert_dim
    for b, n in enumerate(m.source.blocks):
        choi = np.zeros((n * nt, n * nt), dtype=complex)
        for i in range(n):
            for j in range(n):
                col = m.matrix[:, m.source.hs_index(b, i, j)]
                img = from_hs(m.target, col).to_dense()
                choi[i * nt : (i + 1) * nt, j * nt : (j + 1) * nt] = img
        out.append(choi)
    return out


def choi_min_eigenvalue(m: LinearOperatorMap) -> float:
    worst = np.inf
    for choi in choi_blocks(m):
        herm = (choi + choi.conj().T) / 2
        worst = min(worst, float(np.linalg.eigvalsh(herm)[0]))
    return worst


def is_tp(m: LinearOperatorMap, tol: float = DEFAULT_ATOL) -> PredicateResult:
    dev = tp_deviation(m)
    return PredicateResult(dev <= tol, dev)


def is_hp(m: LinearOperatorMap, tol: float = DEFAULT_ATOL) -> PredicateResult:
    dev = hp_deviation(m)
    return PredicateResult(dev <= tol, dev)


def is_cp(m: LinearOperatorMap, tol: float = DEFAULT_ATOL) -> PredicateResult:
    """CP check; the deviation is how far the worst Choi eigenvalue dips below 0."""
    lam = choi_min_eigenvalue(m)
    dev = max(0.0, -lam)
    return PredicateResult(dev <= tol, dev)


class MapClassification(NamedTuple):
    is_tp: bool
    tp_deviation: float
    is_hp: bool
    hp_deviation: float
    is_cp: bool
    choi_min_eigenvalue: float

    @property
    def is_cptp(self) -> bool:
        return self.is_tp and self.is_cp


def classify_map(m: LinearOperatorMap, tol: float = DEFAULT_ATOL) -> MapClassification:
    tp_ok, tp_dev = is_tp(m, tol)
    hp_ok, hp_dev = is_hp(m, tol)
    lam = choi_min_eigenvalue(m)
    return MapClassification(tp_ok, tp_dev, hp_ok, hp_dev, lam >= -tol, lam)


def is_cptp(m: LinearOperatorMap, tol: float = DEFAULT_ATOL) -> PredicateResult:
    c = classify_map(m, tol)
    return PredicateResult(c.is_cptp, max(c.tp_deviation, max(0.0, -c.choi_min_eigenvalue)))


# ---------------------------------------------------------------------------
# random channels
# ---------------------------------------------------------------------------


def _pinch_to_blocks(shape: AlgebraShape, dense: np.ndarray) -> AlgebraElement:
    """Project a dense Hilbert-space operator onto the block-diagonal algebra."""
    blocks, pos = [], 0
    for n in shape.blocks:
        blocks.append(dense[pos : pos + n, pos : pos + n])
        pos += n
    return AlgebraElement(shape, blocks)


def random_cptp(source: AlgebraShape, target: AlgebraShape, seed=None) -> LinearOperatorMap:
    """Random channel: per source block, a Haar isometry into target x environment,
    partial trace over the environment, then compression onto the target blocks."""
    rng = as_rng(seed)
    nt = target.hilbert_dim
    cols = np.empty((target.total_dim, source.total_dim), dtype=complex)
    for b, n in enumerate(source.blocks):
        env = n * nt
        g = _ginibre(rng, nt * env, n)
        q, r = np.linalg.qr(g)
        d = np.diag(r)
        iso = q * (d / np.abs(d))  # (nt*env, n) isometry
        kraus = [iso[k::env, :] for k in range(env)]  # nt x n pieces
        for i in range(n):
            for j in range(n):
                unit = np.zeros((n, n), dtype=complex)
                unit[i, j] = 1.0
                dense = sum(k @ unit @ k.conj().T for k in kraus)
                col = _pinch_to_blocks(target, dense).to_hs()
                cols[:, source.hs_index(b, i, j)] = col
    return LinearOperatorMap(source, target, cols)


def random_hptp(
    source: AlgebraShape, target: AlgebraShape, seed=None, skew: float = 0.5
) -> LinearOperatorMap:
    """Random hermitian- and trace-preserving map; generically not CP."""
    rng = as_rng(seed)
    base = random_cptp(source, target, rng)
    a = random_cptp(source, target, rng)
    b = random_cptp(source, target, rng)
    m = base.matrix + skew * (a.matrix - b.matrix)
    return LinearOperatorMap(source, target, m)


def map_max_diff(f: LinearOperatorMap, g: LinearOperatorMap) -> float:
    if f.source != g.source or f.target != g.target:
        raise ValueError("maps act between different algebras")
    return float(np.abs(f.matrix - g.matrix).max())


# ---------------------------------------------------------------------------
# chains
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Chain:
    """Composable sequence of maps, modeling successive time steps."""

    maps: tuple[LinearOperatorMap, ...]

    def __init__(self, maps: Sequence[LinearOperatorMap]):
        maps = tuple(maps)
        if not maps:
            raise ValueError("a chain needs at least one map")
        for i in range(1, len(maps)):
            if maps[i].source != maps[i - 1].target:
                raise ValueError(f"maps {i - 1} and {i} do not compose")
        object.__setattr__(self, "maps", maps)

    def __len__(self) -> int:
        return len(self.maps)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return Chain(self.maps[i])
        return self.maps[i]

    @property
    def algebras(self) -> tuple[AlgebraShape, ...]:
        """The n+1 algebras the chain steps through."""
        return (self.maps[0].source,) + tuple(m.target for m in self.maps)

    def compose_all(self) -> LinearOperatorMap:
        """The end-to-end composite map (last map outermost)."""
        return reduce(lambda acc, m: m @ acc, self.maps[1:], self.maps[0])

    def up_to(self, i: int) -> LinearOperatorMap:
        """Composite of the first i maps; identity on the source when i = 0."""
        if i == 0:
            return identity_map(self.maps[0].source)
        return self[:i].compose_all()

    def is_cptp(self, tol: float = DEFAULT_ATOL) -> PredicateResult:
        worst = 0.0
        for m in self.maps:
            ok, dev = is_cptp(m, tol)
            worst = max(worst, dev)
        return PredicateResult(worst <= tol, worst)
