"""Dynamical Bayesian inversion of channels with respect to states over time.

A channel together with an input state determines a two-step state over
time; a reverse channel satisfies the Bayes' rule when its own state over
time, built from the output state and read backwards through the factor
swap, reproduces the forward one.  Classically this is exactly
p(x) p(y|x) = p(y) p(x|y).

The reverse channel is found by a least-squares solve in superoperator
coordinates: the defining equation is linear in the unknown map and
decouples into one Sylvester-type system per block of the output algebra.
Non-existence (an irreducible residual) and solution-space degeneracy are
reported as outcomes, not raised as errors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import (
    DEFAULT_ATOL,
    AlgebraElement,
    AlgebraShape,
    FactoredElement,
    max_abs_diff,
    tensor_shape,
)
from .bloom import bloom_step
from .broadcast import broadcast_anticommutator
from .chanmap import (
    LinearOperatorMap,
    choi_min_eigenvalue,
    hp_deviation,
    tp_deviation,
)
from .covariance import CovarianceReport, StarIsomorphism, tensor_iso

__all__ = [
    "gamma_swap",
    "check_swap_naturality",
    "BayesDiagnostics",
    "solve_bayes",
    "BayesCheckReport",
    "verify_bayes",
    "check_bayes_covariance",
]


def _commutation_matrix(m: int, n: int) -> np.ndarray:
    """Unitary sending u (x) v to v (x) u for u in C^m, v in C^n."""
    s = np.zeros((n * m, m * n))
    for i in range(m):
        for j in range(n):
            s[j * m + i, i * n + j] = 1.0
    return s


def gamma_swap(a: AlgebraShape, b: AlgebraShape) -> StarIsomorphism:
    """The lexicographic swap B (x) A -> A (x) B, in classified form.

    Tuple blocks (beta, alpha) move to (alpha, beta) and each block is
    conjugated by the commutation unitary that reorders the Kronecker legs.
    """
    ka, kb = a.num_blocks, b.num_blocks
    source = tensor_shape(b, a)
    target = tensor_shape(a, b)
    perm = [0] * source.num_blocks
    for beta in range(kb):
        for alpha in range(ka):
            perm[beta * ka + alpha] = alpha * kb + beta
    units = []
    for alpha in range(ka):
        for beta in range(kb):
            units.append(
                _commutation_matrix(b.blocks[beta], a.blocks[alpha]).astype(complex)
            )
    return StarIsomorphism(source, target, tuple(perm), tuple(units))


def check_swap_naturality(
    phi: StarIsomorphism, psi: StarIsomorphism, tol: float = 1e-11
) -> float:
    """Deviation of (phi tensor psi) o swap from swap' o (psi tensor phi)."""
    gamma = gamma_swap(phi.source, psi.source)
    gamma_p = gamma_swap(phi.target, psi.target)
    lhs = tensor_iso([phi, psi]).as_map() @ gamma.as_map()
    rhs = gamma_p.as_map() @ tensor_iso([psi, phi]).as_map()
    return float(np.abs(lhs.matrix - rhs.matrix).max())


@dataclass(frozen=True)
class BayesDiagnostics:
    """Outcome of a Bayesian-inverse solve."""

    residual: float
    tp_deviation: float
    hp_deviation: float
    choi_min_eigenvalue: float
    degeneracy_dimension: int
    tol: float

    @property
    def exists(self) -> bool:
        """Whether a reverse channel satisfying the rule was found at tolerance."""
        return self.residual <= self.tol

    @property
    def is_cp(self) -> bool:
        return self.choi_min_eigenvalue >= -self.tol

    def as_dict(self) -> dict:
        return {
            "residual": self.residual,
            "exists": self.exists,
            "tp_deviation": self.tp_deviation,
            "hp_deviation": self.hp_deviation,
            "choi_min_eigenvalue": self.choi_min_eigenvalue,
            "is_cp": self.is_cp,
            "degeneracy_dimension": self.degeneracy_dimension,
            "tol": self.tol,
        }


def _forward_joint(e: LinearOperatorMap, rho: AlgebraElement) -> FactoredElement:
    return bloom_step(FactoredElement.from_element(rho), e)


def solve_bayes(
    e: LinearOperatorMap,
    rho: AlgebraElement,
    tol: float = 1e-9,
) -> tuple[LinearOperatorMap, BayesDiagnostics]:
    """Minimum-norm reverse channel for (e, rho) under the canonical joint.

    Solves the linear system expressing that the backward joint, swapped,
    equals the forward joint.  The system splits per output block: each block
    contributes a Sylvester operator built from broadcasting the output state,
    invertible exactly when that state is faithful; rank deficiencies are
    surfaced in ``degeneracy_dimension`` and the residual decides existence.
    """
    if rho.shape != e.source:
        raise ValueError("state does not live in the channel's source algebra")
    if not rho.is_state(max(tol, DEFAULT_ATOL)):
        raise ValueError("Bayesian inversion is defined for states")
    sigma = e.apply(rho)
    a, b = e.source, e.target

    forward = _forward_joint(e, rho)  # over (A, B)
    rhs_joint = gamma_swap(b, a).apply_factored(forward, (b, a))  # over (B, A)

    k_broadcast = broadcast_anticommutator(sigma)  # over (B, B), diagonal blocks
    a_total = a.total_dim

    x = np.zeros((a_total, b.total_dim), dtype=complex)
    degeneracy = 0
    for beta, m in enumerate(b.blocks):
        k_blk = k_broadcast.tuple_block((beta, beta))
        k_mat = k_blk.reshape(m, m, m, m).transpose(0, 2, 1, 3).reshape(m * m, m * m)

        rhs_cols = []
        for alpha, n in enumerate(a.blocks):
            r_blk = rhs_joint.tuple_block((beta, alpha))
            rhs_cols.append(
                r_blk.reshape(m, n, m, n).transpose(0, 2, 1, 3).reshape(m * m, n * n)
            )
        rhs = np.concatenate(rhs_cols, axis=1)

        w, _, rank, _ = np.linalg.lstsq(k_mat, rhs, rcond=None)
        degeneracy += (m * m - int(rank)) * a_total
        x[:, b.hs_slice(beta)] = w.T

    ebar = LinearOperatorMap(b, a, x)

    backward = bloom_step(FactoredElement.from_element(sigma), ebar)
    swapped = gamma_swap(a, b).apply_factored(backward, (a, b))
    residual = max_abs_diff(forward.flatten(), swapped.flatten())

    diagnostics = BayesDiagnostics(
        residual=residual,
        tp_deviation=tp_deviation(ebar),
        hp_deviation=hp_deviation(ebar),
        choi_min_eigenvalue=choi_min_eigenvalue(ebar),
        degeneracy_dimension=degeneracy,
        tol=tol,
    )
    return ebar, diagnostics


@dataclass(frozen=True)
class BayesCheckReport:
    deviation: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.deviation <= self.tol


def verify_bayes(
    e: LinearOperatorMap,
    rho: AlgebraElement,
    ebar: LinearOperatorMap,
    tol: float = 1e-9,
) -> BayesCheckReport:
    """Entrywise deviation between the forward joint and the swapped backward one."""
    if ebar.source != e.target or ebar.target != e.source:
        raise ValueError("reverse map must run opposite to the forward map")
    forward = _forward_joint(e, rho)
    backward = bloom_step(FactoredElement.from_element(e.apply(rho)), ebar)
    swapped = gamma_swap(e.source, e.target).apply_factored(backward, (e.source, e.target))
    return BayesCheckReport(max_abs_diff(forward.flatten(), swapped.flatten()), tol)


def check_bayes_covariance(
    e: LinearOperatorMap,
    rho: AlgebraElement,
    ebar: LinearOperatorMap,
    phi: StarIsomorphism,
    psi: StarIsomorphism,
    tol: float = 1e-9,
) -> CovarianceReport:
    """Relabeling both algebras preserves the Bayes' rule.

    The unprimed rule is the hypothesis; when it fails at tolerance the check
    is flagged vacuous.  The conclusion deviation evaluates the rule for the
    relabeled channel, reverse channel, and state.
    """
    hyp = verify_bayes(e, rho, ebar, tol).deviation
    e_p = psi.as_map() @ e @ phi.inverse().as_map()
    ebar_p = phi.as_map() @ ebar @ psi.inverse().as_map()
    rho_p = phi.apply(rho)
    con = verify_bayes(e_p, rho_p, ebar_p, tol).deviation
    return CovarianceReport(hyp, con, tol)
