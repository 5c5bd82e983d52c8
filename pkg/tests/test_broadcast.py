import numpy as np
import pytest

import qsot as q

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]])
PAULI_Z = np.diag([1.0, -1.0]).astype(complex)

S2 = q.AlgebraShape([2])


def _pair(a, b):
    return q.tensor_elements(
        q.FactoredElement.from_element(a), q.FactoredElement.from_element(b)
    ).flatten()


def test_mu_on_identity():
    rho = q.random_state(S2, 0)
    out = q.mu_map(S2).apply(_pair(rho, q.identity_element(S2)))
    assert q.max_abs_diff(out, rho) < 1e-14


def test_mu_pauli_products():
    x = q.AlgebraElement(S2, [PAULI_X])
    y = q.AlgebraElement(S2, [PAULI_Y])
    iz = q.AlgebraElement(S2, [1j * PAULI_Z])
    assert q.max_abs_diff(q.mu_map(S2).apply(_pair(x, y)), iz) < 1e-14
    assert q.max_abs_diff(q.mu_tilde_map(S2).apply(_pair(x, y)), -1 * iz) < 1e-14


def test_mu_multiblock_agrees_with_blockwise_product():
    shape = q.AlgebraShape([2, 1])
    rng = np.random.default_rng(9)
    a = q.random_element(shape, rng)
    b = q.random_element(shape, rng)
    assert q.max_abs_diff(q.mu_map(shape).apply(_pair(a, b)), a @ b) < 1e-13
    assert q.max_abs_diff(q.mu_tilde_map(shape).apply(_pair(a, b)), b @ a) < 1e-13


def test_swap_element_scalar():
    one = q.swap_element(q.AlgebraShape([1]))
    assert one.flatten().blocks[0][0, 0] == 1


def test_swap_element_qubit_matrix():
    swap = q.swap_element(S2).flatten().blocks[0]
    expected = np.array(
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
    )
    assert np.abs(swap - expected).max() == 0


@pytest.mark.parametrize("d", [2, 3, 4])
def test_swap_spectrum_multiplicities(d):
    swap = q.swap_element(q.AlgebraShape([d])).flatten()
    vals = q.spectrum(swap)
    assert np.sum(np.isclose(vals, 1)) == d * (d + 1) // 2
    assert np.sum(np.isclose(vals, -1)) == d * (d - 1) // 2
    assert swap.is_self_adjoint(1e-12)
    assert swap.is_unitary(1e-12)
    assert q.max_abs_diff(swap @ swap, q.identity_element(swap.shape)) < 1e-12


def test_swap_rejects_multiblock():
    with pytest.raises(ValueError):
        q.swap_element(q.AlgebraShape([2, 1]))


def test_broadcast_of_maximally_mixed():
    out = q.broadcast_map(S2).apply(q.identity_element(S2) / 2)
    half_swap = 0.5 * q.swap_element(S2).flatten()
    assert q.max_abs_diff(out, half_swap) < 1e-12
    assert np.allclose(q.spectrum(out), [-0.5, 0.5, 0.5, 0.5], atol=1e-12)


@pytest.mark.parametrize("blocks", [[2], [3], [2, 1], [1, 1]])
def test_adjoint_and_anticommutator_forms_agree(blocks):
    shape = q.AlgebraShape(blocks)
    bmap = q.broadcast_map(shape)
    rng = np.random.default_rng(4)
    for _ in range(5):
        a = q.random_element(shape, rng)
        assert (
            q.max_abs_diff(bmap.apply(a), q.broadcast_anticommutator(a).flatten())
            < 1e-12
        )


@pytest.mark.parametrize("blocks", [[2], [3], [2, 1]])
def test_broadcast_marginals(blocks):
    shape = q.AlgebraShape(blocks)
    bmap = q.broadcast_map(shape)
    rng = np.random.default_rng(6)
    for _ in range(5):
        rho = q.random_virtual_state(shape, rng)
        out = q.FactoredElement((shape, shape), bmap.apply(rho))
        for leg in (0, 1):
            assert q.max_abs_diff(q.partial_trace(out, {leg}).as_element(), rho) < 1e-10


@pytest.mark.parametrize("d", [2, 3])
def test_broadcast_is_tp_hp_not_cp(d):
    bmap = q.broadcast_map(q.AlgebraShape([d]))
    assert q.is_tp(bmap, 1e-12).ok
    assert q.is_hp(bmap, 1e-12).ok
    verdict = q.classify_map(bmap)
    assert not verdict.is_cp
    assert verdict.choi_min_eigenvalue < -0.1


def test_classical_broadcast():
    shape = q.AlgebraShape([1, 1])
    bcl = q.classical_broadcast(shape)
    d0 = q.delta_state(shape, 0)
    out = bcl.apply(d0)
    expected = q.tensor_elements(
        q.FactoredElement.from_element(d0), q.FactoredElement.from_element(d0)
    ).flatten()
    assert q.max_abs_diff(out, expected) == 0

    p = q.classical_state([0.3, 0.7])
    joint = bcl.apply(p)
    assert np.allclose([b[0, 0].real for b in joint.blocks], [0.3, 0, 0, 0.7])
    assert q.is_tp(bcl, 1e-14).ok
    with pytest.raises(ValueError):
        q.classical_broadcast(S2)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_broadcast_axioms_sweep(d):
    rep = q.check_broadcast_axioms(q.AlgebraShape([d]), trials=30, seed=17, tol=1e-10)
    assert rep.passed, rep
    if d == 1:
        assert rep.max_deviation < 1e-14


def test_broadcast_axioms_rejects_multiblock():
    with pytest.raises(ValueError):
        q.check_broadcast_axioms(q.AlgebraShape([1, 1]), trials=1)
