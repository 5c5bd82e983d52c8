"""Discretized unitary evolution generated by a fixed Hamiltonian.

Continuous evolution under a Hamiltonian is modeled as a chain of unitary
conjugations, one per time step; each entry of ``durations`` is the length
of its step, so the composite propagator is the exponential of the total
elapsed time.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .algebra import DEFAULT_ATOL, AlgebraElement
from .chanmap import Chain, ad_unitary

__all__ = ["evolution_unitary", "unitary_chain", "transform_hamiltonian"]


def evolution_unitary(h: AlgebraElement, t: float, tol: float = DEFAULT_ATOL) -> AlgebraElement:
    """exp(-i t H), blockwise through the eigendecomposition of H."""
    if not h.is_self_adjoint(tol):
        raise ValueError("the generator must be self-adjoint")
    blocks = []
    for b in h.blocks:
        w, v = np.linalg.eigh(b)
        blocks.append((v * np.exp(-1j * t * w)) @ v.conj().T)
    return AlgebraElement(h.shape, blocks)


def unitary_chain(
    h: AlgebraElement, durations: Sequence[float], tol: float = DEFAULT_ATOL
) -> Chain:
    """One unitary conjugation per step duration, all generated by ``h``."""
    durations = [float(t) for t in durations]
    if not durations:
        raise ValueError("need at least one step")
    if not all(np.isfinite(durations)):
        raise ValueError("step durations must be finite")
    return Chain([ad_unitary(evolution_unitary(h, t, tol)) for t in durations])


def transform_hamiltonian(
    h: AlgebraElement, u: AlgebraElement, tol: float = DEFAULT_ATOL
) -> AlgebraElement:
    """Relabeled generator U H U^dag; it drives the relabeled evolution."""
    if not h.is_self_adjoint(tol):
        raise ValueError("the generator must be self-adjoint")
    if not u.is_unitary(tol):
        raise ValueError("the frame change must be unitary")
    return AlgebraElement(
        h.shape,
        [ub @ hb @ ub.conj().T for ub, hb in zip(u.blocks, h.blocks)],
    )
