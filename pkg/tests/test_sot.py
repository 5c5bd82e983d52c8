import numpy as np
import pytest

import qsot as q
from support import (
    classical_joint_from_sot,
    classical_joint_oracle,
    random_algebra_walk,
    random_chain,
    random_classical_chain,
    random_hptp_chain,
    random_probability,
)

S2 = q.AlgebraShape([2])


def test_star_identity_channel_on_mixed_qubit():
    s = q.star(q.Chain([q.identity_map(S2)]), q.identity_element(S2) / 2)
    assert q.max_abs_diff(s.value.flatten(), 0.5 * q.swap_element(S2).flatten()) < 1e-12


def test_star_classical_joint():
    e = q.classical_channel(np.array([[0.9, 0.2], [0.1, 0.8]]))
    s = q.star(q.Chain([e]), q.classical_state([0.3, 0.7]))
    assert np.abs(classical_joint_from_sot(s) - [0.27, 0.03, 0.14, 0.56]).max() < 1e-14


def test_star_preconditions():
    with pytest.raises(ValueError):
        q.Chain([])  # no empty chains, so no zero-step state over time
    not_virtual = q.identity_element(S2)  # trace 2
    with pytest.raises(ValueError):
        q.star(q.Chain([q.identity_map(S2)]), not_virtual)
    wrong_algebra = q.random_state(q.AlgebraShape([3]), 0)
    with pytest.raises(ValueError):
        q.star(q.Chain([q.identity_map(S2)]), wrong_algebra)


def test_marginal_endpoints():
    rng = np.random.default_rng(41)
    algs = random_algebra_walk(3, rng)
    ch = random_chain(algs, rng)
    rho = q.random_state(algs[0], rng)
    s = q.star(ch, rho)
    assert q.max_abs_diff(q.marginal(s, 0), rho) < 1e-12
    assert q.max_abs_diff(q.marginal(s, 3), ch.compose_all().apply(rho)) < 1e-12
    with pytest.raises(IndexError):
        q.marginal(s, 4)


def test_marginals_random_sweep():
    rng = np.random.default_rng(42)
    for n in (1, 2, 3, 4):
        for _ in range(3):
            algs = random_algebra_walk(n, rng)
            ch = random_chain(algs, rng)
            rho = q.random_state(algs[0], rng)
            rep = q.verify_marginals(q.star(ch, rho), tol=1e-10)
            assert rep.passed, rep.deviations


def test_propagator_random_and_classical():
    rng = np.random.default_rng(43)
    ch = random_chain(random_algebra_walk(2, rng), rng)
    rho = q.random_state(ch.algebras[0], rng)
    assert q.verify_propagator(ch, rho, tol=1e-10).passed

    sizes = [2, 3, 2]
    cch = random_classical_chain(sizes, rng)
    p = q.classical_state(random_probability(sizes[0], rng))
    assert q.verify_propagator(cch, p, tol=1e-14).passed


def test_propagator_identity_chain():
    ch = q.Chain([q.identity_map(S2), q.identity_map(S2)])
    rho = q.random_state(S2, 7)
    rep = q.verify_propagator(ch, rho, tol=1e-12)
    assert rep.passed


def test_propagator_needs_two_steps():
    with pytest.raises(ValueError):
        q.verify_propagator(q.Chain([q.identity_map(S2)]), q.identity_element(S2) / 2)


def test_spectrum_report_swap_half():
    s = q.star(q.Chain([q.identity_map(S2)]), q.identity_element(S2) / 2)
    rep = q.spectrum_report(s)
    assert rep.min_eigenvalue == pytest.approx(-0.5, abs=1e-12)
    assert rep.negative_count == 1
    assert rep.trace == pytest.approx(1, abs=1e-12)
    assert np.sum(rep.eigenvalues) == pytest.approx(1, abs=1e-12)


def test_spectrum_report_classical_nonnegative():
    rng = np.random.default_rng(44)
    ch = random_classical_chain([3, 2, 3], rng)
    p = q.classical_state(random_probability(3, rng))
    rep = q.spectrum_report(q.star(ch, p))
    assert rep.min_eigenvalue >= -1e-12
    assert rep.negative_count == 0


def test_star_output_virtual_for_hptp_chains():
    rng = np.random.default_rng(45)
    for n in (1, 2, 3):
        algs = random_algebra_walk(n, rng)
        ch = random_hptp_chain(algs, rng)
        rho = q.random_virtual_state(algs[0], rng)
        flat = q.star(ch, rho).value.flatten()
        assert flat.hermiticity_deviation() < 1e-10
        assert abs(flat.trace() - 1.0) < 1e-12


def test_classical_reduction_exact():
    rng = np.random.default_rng(46)
    for sizes in ([2, 2], [3, 2, 4], [2, 3, 2, 2]):
        ch = random_classical_chain(sizes, rng)
        prior = random_probability(sizes[0], rng)
        s = q.star(ch, q.classical_state(prior))
        expected = classical_joint_oracle(prior, [m.matrix.real for m in ch.maps])
        assert np.abs(classical_joint_from_sot(s) - expected).max() < 1e-13
