import numpy as np
import pytest

import qsot as q
from support import SHAPE_POOL, random_shape

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)


def test_apply_identity_and_compose():
    shape = q.AlgebraShape([2, 1])
    ident = q.identity_map(shape)
    rho = q.random_state(shape, 0)
    assert q.max_abs_diff(ident.apply(rho), rho) == 0

    f = q.random_cptp(shape, q.AlgebraShape([3]), 1)
    assert q.map_max_diff(f @ ident, f) < 1e-14
    assert q.map_max_diff(q.identity_map(f.target) @ f, f) < 1e-14


def test_tensor_trace_with_identity():
    s2, s3 = q.AlgebraShape([2]), q.AlgebraShape([3])
    rng = np.random.default_rng(2)
    rho = q.random_state(s2, rng)
    sigma = q.random_state(s3, rng)
    prod = q.tensor_elements(
        q.FactoredElement.from_element(rho), q.FactoredElement.from_element(sigma)
    )
    tr_then_id = q.tensor_maps(q.trace_functional(s2), q.identity_map(s3))
    out = tr_then_id.apply(prod.flatten())
    assert q.max_abs_diff(out, rho.trace() * sigma) < 1e-12


def test_hs_adjoint_of_unitary_conjugation():
    shape = q.AlgebraShape([3])
    u = q.haar_unitary(shape, 7)
    ad_u = q.ad_unitary(u)
    # defining identity on a spanning basis
    for k in range(shape.total_dim):
        for l in range(shape.total_dim):
            a = q.basis_element(shape, k)
            b = q.basis_element(shape, l)
            lhs = ad_u.apply(a).hs_inner(b)
            rhs = a.hs_inner(ad_u.hs_adjoint().apply(b))
            assert lhs == pytest.approx(rhs, abs=1e-12)
    assert q.map_max_diff(ad_u.hs_adjoint(), q.ad_unitary(u.dagger())) < 1e-12


def test_hs_adjoint_involution_and_composition():
    rng = np.random.default_rng(5)
    f = q.random_cptp(q.AlgebraShape([2]), q.AlgebraShape([2, 1]), rng)
    g = q.random_cptp(q.AlgebraShape([3]), q.AlgebraShape([2]), rng)
    assert q.map_max_diff(f.hs_adjoint().hs_adjoint(), f) == 0
    lhs = (f @ g).hs_adjoint()
    rhs = g.hs_adjoint() @ f.hs_adjoint()
    assert q.map_max_diff(lhs, rhs) < 1e-12


def test_hs_adjoint_of_trace_map():
    s2, s3 = q.AlgebraShape([2]), q.AlgebraShape([3])
    tr = q.trace_map([s2, s3])
    adj = tr.hs_adjoint()
    b = q.random_element(s3, 11)
    expected = q.tensor_elements(
        q.FactoredElement.from_element(q.identity_element(s2)),
        q.FactoredElement.from_element(b),
    ).flatten()
    assert q.max_abs_diff(adj.apply(b), expected) < 1e-12


def test_ad_unitary_examples():
    s2 = q.AlgebraShape([2])
    assert q.map_max_diff(q.ad_unitary(q.identity_element(s2)), q.identity_map(s2)) == 0

    x = q.AlgebraElement(s2, [PAULI_X])
    flipped = q.ad_unitary(x).apply(q.AlgebraElement(s2, [np.diag([0.2, 0.8])]))
    assert np.allclose(flipped.blocks[0], np.diag([0.8, 0.2]))

    u = q.haar_unitary(q.AlgebraShape([2, 1]), 3)
    ok, dev = q.is_cptp(q.ad_unitary(u))
    assert ok, dev
    with pytest.raises(ValueError):
        q.ad_unitary(q.AlgebraElement(s2, [2 * np.eye(2)]))


def test_decoherence_map():
    s2 = q.AlgebraShape([2])
    dec = q.decoherence_map(s2)
    off = q.basis_element(s2, s2.hs_index(0, 0, 1))
    diag = q.basis_element(s2, s2.hs_index(0, 1, 1))
    assert dec.apply(off).hs_norm() == 0
    assert q.max_abs_diff(dec.apply(diag), diag) == 0
    assert q.map_max_diff(dec @ dec, dec) == 0
    assert q.is_cptp(dec).ok
    with pytest.raises(ValueError):
        q.decoherence_map(q.AlgebraShape([2, 1]))


def test_classical_channel():
    ident = q.classical_channel(np.eye(3))
    assert q.map_max_diff(ident, q.identity_map(q.AlgebraShape([1, 1, 1]))) == 0

    e = q.classical_channel(np.array([[0.9, 0.2], [0.1, 0.8]]))
    out = e.apply(q.classical_state([0.3, 0.7]))
    assert np.allclose([b[0, 0].real for b in out.blocks], [0.41, 0.59])
    assert q.is_cptp(e).ok

    with pytest.raises(ValueError):
        q.classical_channel(np.array([[0.5, 0.2], [0.4, 0.8]]))
    with pytest.raises(ValueError):
        q.classical_channel(np.array([[1.2, 0.0], [-0.2, 1.0]]))


def test_trace_map():
    s2, s3 = q.AlgebraShape([2]), q.AlgebraShape([3])
    rng = np.random.default_rng(8)
    rho = q.random_state(s2, rng)
    sigma = q.random_state(s3, rng)
    tr = q.trace_map([s2, s3])
    prod = q.tensor_elements(
        q.FactoredElement.from_element(rho), q.FactoredElement.from_element(sigma)
    )
    assert q.max_abs_diff(tr.apply(prod.flatten()), sigma) < 1e-12

    half_swap = (0.5 * q.swap_element(s2)).flatten()
    assert q.max_abs_diff(
        q.trace_map([s2, s2]).apply(half_swap), q.identity_element(s2) / 2
    ) < 1e-12
    assert q.is_cptp(tr).ok
    with pytest.raises(ValueError):
        q.trace_map([s2])


def test_tp_failure_reported():
    s2 = q.AlgebraShape([2])
    doubled = q.LinearOperatorMap(s2, s2, 2 * np.eye(4))
    ok, dev = q.is_tp(doubled)
    assert not ok
    assert dev == pytest.approx(1.0)
    assert not q.is_cptp(doubled).ok


def test_cptp_of_cptp_state_output():
    rng = np.random.default_rng(10)
    for _ in range(10):
        src, tgt = random_shape(rng), random_shape(rng)
        e = q.random_cptp(src, tgt, rng)
        ok, dev = q.is_cptp(e)
        assert ok, dev
        rho = q.random_state(src, rng)
        out = e.apply(rho)
        assert out.trace() == pytest.approx(1, abs=1e-10)
        assert out.is_state(1e-9)


def test_random_cptp_deterministic():
    a = q.random_cptp(q.AlgebraShape([2, 1]), q.AlgebraShape([3]), 77)
    b = q.random_cptp(q.AlgebraShape([2, 1]), q.AlgebraShape([3]), 77)
    assert q.map_max_diff(a, b) == 0


def test_random_hptp_is_hp_tp():
    rng = np.random.default_rng(12)
    for _ in range(5):
        m = q.random_hptp(random_shape(rng), random_shape(rng), rng)
        assert q.is_tp(m).ok
        assert q.is_hp(m).ok


def _brute_force_cp_verdict(m: q.LinearOperatorMap, rng, tol=1e-9, aux_dim=3):
    """Independent CP oracle: positivity of (map (x) id) on positive inputs,
    including the maximally entangled witness for each source block."""
    aux = q.AlgebraShape([aux_dim])
    extended = q.tensor_maps(m, q.identity_map(aux))
    worst = np.inf
    prod_shape = extended.source
    for b, n in enumerate(m.source.blocks):
        vec = np.zeros((n, aux_dim), dtype=complex)
        vec[:n, :n] = np.eye(n) / np.sqrt(n)
        dense = np.outer(vec.reshape(-1), vec.conj().reshape(-1))
        blocks = [
            dense if k == b else np.zeros((d, d))
            for k, d in enumerate(prod_shape.blocks)
        ]
        witness = q.AlgebraElement(prod_shape, blocks)
        out = extended.apply(witness)
        worst = min(worst, float(q.spectrum(out, tol=1e-7).min()))
    for _ in range(10):
        rho = q.random_state(prod_shape, rng)
        out = extended.apply(rho)
        worst = min(worst, float(q.spectrum(out, tol=1e-7).min()))
    return worst >= -tol


def test_choi_verdict_matches_brute_force():
    rng = np.random.default_rng(21)
    checked = 0
    for trial in range(100):
        src = SHAPE_POOL[trial % len(SHAPE_POOL)]
        tgt = SHAPE_POOL[(trial // 2) % len(SHAPE_POOL)]
        if trial % 2 == 0:
            m = q.random_cptp(src, tgt, rng)
        else:
            m = q.random_hptp(src, tgt, rng, skew=0.8)
        lam = q.chanmap.choi_min_eigenvalue(m)
        if -1e-6 < lam < -1e-12:
            continue  # borderline instance, verdicts differ only on tolerance
        choi_verdict = lam >= -1e-9
        assert choi_verdict == _brute_force_cp_verdict(m, rng)
        checked += 1
    assert checked >= 90


def test_chain_validation():
    s2, s3 = q.AlgebraShape([2]), q.AlgebraShape([3])
    rng = np.random.default_rng(1)
    e1 = q.random_cptp(s2, s3, rng)
    e2 = q.random_cptp(s3, s2, rng)
    ch = q.Chain([e1, e2])
    assert ch.algebras == (s2, s3, s2)
    assert len(ch) == 2
    assert ch.is_cptp().ok
    assert q.map_max_diff(ch.compose_all(), e2 @ e1) == 0
    with pytest.raises(ValueError):
        q.Chain([])
    with pytest.raises(ValueError):
        q.Chain([e1, e1])
