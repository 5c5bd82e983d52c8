"""Shared generators and oracles for the test suite."""

from __future__ import annotations

import itertools

import numpy as np

import qsot as q

SHAPE_POOL = (
    q.AlgebraShape([2]),
    q.AlgebraShape([3]),
    q.AlgebraShape([1, 1]),
    q.AlgebraShape([2, 1]),
)


def random_shape(rng: np.random.Generator) -> q.AlgebraShape:
    return SHAPE_POOL[rng.integers(len(SHAPE_POOL))]


def random_algebra_walk(n: int, rng: np.random.Generator) -> list[q.AlgebraShape]:
    return [random_shape(rng) for _ in range(n + 1)]


def random_chain(algebras, rng: np.random.Generator) -> q.Chain:
    return q.Chain(
        [q.random_cptp(algebras[i], algebras[i + 1], rng) for i in range(len(algebras) - 1)]
    )


def random_hptp_chain(algebras, rng: np.random.Generator) -> q.Chain:
    return q.Chain(
        [q.random_hptp(algebras[i], algebras[i + 1], rng) for i in range(len(algebras) - 1)]
    )


def random_stochastic(n_out: int, n_in: int, rng: np.random.Generator) -> np.ndarray:
    """Column-stochastic matrix with full support."""
    m = rng.random((n_out, n_in)) + 0.05
    return m / m.sum(axis=0, keepdims=True)


def random_classical_chain(sizes, rng: np.random.Generator) -> q.Chain:
    maps = [
        q.classical_channel(random_stochastic(sizes[i + 1], sizes[i], rng))
        for i in range(len(sizes) - 1)
    ]
    return q.Chain(maps)


def random_probability(n: int, rng: np.random.Generator) -> np.ndarray:
    p = rng.random(n) + 0.05
    return p / p.sum()


def classical_joint_oracle(prior: np.ndarray, stochastics: list[np.ndarray]) -> np.ndarray:
    """Brute-force chain-rule joint over all outcome tuples, lexicographic order."""
    sizes = [prior.size] + [s.shape[0] for s in stochastics]
    joint = np.zeros(sizes)
    for tup in itertools.product(*[range(k) for k in sizes]):
        p = prior[tup[0]]
        for i, s in enumerate(stochastics):
            p *= s[tup[i + 1], tup[i]]
        joint[tup] = p
    return joint.reshape(-1)


def classical_joint_from_sot(s: q.StateOverTime) -> np.ndarray:
    """Diagonal of a classical state over time, in lexicographic tuple order."""
    return np.array([b[0, 0].real for b in s.value.flatten().blocks])


def random_nontrivial_iso(shape: q.AlgebraShape, rng: np.random.Generator) -> q.StarIsomorphism:
    """Random isomorphism with a non-identity block permutation."""
    if shape.num_blocks < 2:
        raise ValueError("need at least two blocks to permute")
    while True:
        iso = q.random_iso(shape, rng)
        if any(t != s for s, t in enumerate(iso.block_perm)):
            return iso


def stochastic_of(channel: q.LinearOperatorMap) -> np.ndarray:
    """Read a classical channel's stochastic matrix back from its coordinates."""
    return channel.matrix.real.copy()
