import dataclasses
import math

import numpy as np
import pytest

from entclone.analytic import ALPHA_MAX, CloneFamily, alpha_critical, fidelity_bh, fidelity_locc, params_for, schmidt_state
from entclone.covariant import assemble_ptilde
from entclone.protocol import (
    average_clone_fidelity,
    branch_fidelity,
    build_dilations,
    build_kraus,
    kraus_to_choi,
    run_protocol_exact,
    run_protocol_sampled,
)


def test_bell_point_parameters():
    ks = build_kraus(ALPHA_MAX)
    assert abs(ks.w - 0.5) < 1e-14
    assert abs(ks.v - 0.25) < 1e-14


def test_measurement_normalizations():
    for alpha in (0.0, 0.2, 0.45, ALPHA_MAX):
        ks = build_kraus(alpha)
        total = sum(m.conj().T @ m for m in ks.m)
        assert np.abs(total - np.eye(2)).max() < 1e-12
        half = ks.m[0].conj().T @ ks.m[0] + ks.m[2].conj().T @ ks.m[2]
        assert np.abs(half - np.eye(2) / 2.0).max() < 1e-12
        completeness = sum(k.conj().T @ k for k in ks.k)
        assert np.abs(completeness - np.eye(4)).max() < 1e-12


def test_kraus_choi_matches_family_operator(t_ops):
    for alpha in (0.2, 0.5, ALPHA_MAX):
        ks = build_kraus(alpha)
        direct = assemble_ptilde(params_for(CloneFamily.LOCC_OPTIMAL, alpha), t_ops)
        assert np.abs(kraus_to_choi(ks) - direct).max() < 1e-10


def test_below_threshold_collapses_to_product_family(t_ops):
    ks = build_kraus(0.2)
    assert ks.v == 0.0
    a = np.zeros((5, 5))
    a[1, 1] = 1.0
    assert np.abs(kraus_to_choi(ks) - assemble_ptilde(a, t_ops)).max() < 1e-10


def test_bell_branches():
    bell = schmidt_state(ALPHA_MAX)
    transcripts = run_protocol_exact(ALPHA_MAX)
    probs = np.array([tr.joint_probability for tr in transcripts])
    assert abs(probs.sum() - 1.0) < 1e-12
    assert np.abs(probs - 0.125).max() < 1e-12
    assert abs(average_clone_fidelity(transcripts, bell) - 5.0 / 8.0) < 1e-12
    fids = sorted(branch_fidelity(tr, bell) for tr in transcripts)
    assert abs(fids[0] - 0.5) < 1e-12
    assert abs(fids[-1] - 0.75) < 1e-12


def test_branch_bits_pair_alice_outcomes():
    transcripts = run_protocol_exact(0.5)
    for tr in transcripts:
        expected_bit = 0 if tr.alice_outcome in (1, 3) else 1
        assert tr.classical_bit == expected_bit
        if tr.classical_bit == 0:
            assert tr.bob_outcome in (1, 3)
        else:
            assert tr.bob_outcome in (2, 4)


def test_exact_average_matches_closed_form():
    for alpha in (0.0, 0.25, alpha_critical(), 0.5, ALPHA_MAX):
        reference = schmidt_state(alpha)
        transcripts = run_protocol_exact(alpha)
        value = average_clone_fidelity(transcripts, reference)
        assert abs(value - fidelity_locc(alpha)) < 1e-12
    assert abs(average_clone_fidelity(run_protocol_exact(0.0), schmidt_state(0.0)) - 25.0 / 36.0) < 1e-12
    assert fidelity_locc(0.0) == fidelity_bh(0.0)


def test_branch_mixture_reproduces_channel(t_ops):
    from entclone.channel import apply_choi
    from entclone.covariant import reorder_to_choi

    alpha = 0.6
    rng = np.random.default_rng(31)
    rho = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    rho = rho @ rho.conj().T
    rho /= np.trace(rho)
    transcripts = run_protocol_exact(alpha, state=rho)
    mixture = sum(tr.joint_probability * tr.post_state for tr in transcripts)
    p_e = reorder_to_choi(kraus_to_choi(build_kraus(alpha)))
    assert np.abs(mixture - apply_choi(p_e, rho)).max() < 1e-12


def test_transcript_states_are_normalized():
    for tr in run_protocol_exact(0.4):
        assert abs(np.trace(tr.post_state) - 1.0) < 1e-12
        assert np.abs(tr.post_state - tr.post_state.conj().T).max() < 1e-12


def test_sampled_estimator():
    exact = fidelity_locc(0.5)
    est, err = run_protocol_sampled(0.5, trials=20000, seed=3)
    assert err > 0.0
    assert abs(est - exact) < 5.0 * err
    again, err_again = run_protocol_sampled(0.5, trials=20000, seed=3)
    assert est == again and err == err_again
    single, spread = run_protocol_sampled(0.5, trials=1, seed=4)
    assert 0.0 <= single <= 1.0
    assert spread == 0.0
    with pytest.raises(ValueError):
        run_protocol_sampled(0.5, trials=0)


def test_run_protocol_validates_state():
    with pytest.raises(ValueError):
        run_protocol_exact(0.5, state=np.eye(4))
    with pytest.raises(ValueError):
        run_protocol_exact(0.5, state=np.diag([2.0, -1.0, 0.0, 0.0]))
    with pytest.raises(ValueError):
        build_kraus(0.9)


def test_dilations_are_isometries():
    for alpha in (0.3, 0.55, ALPHA_MAX):
        ks = build_kraus(alpha)
        u_a, u_b_plus, u_b_minus = build_dilations(ks)
        assert u_a.shape == (16, 2)
        assert u_b_plus.shape == (8, 2)
        assert np.abs(u_a.conj().T @ u_a - np.eye(2)).max() < 1e-12
        assert np.abs(u_b_plus.conj().T @ u_b_plus - np.eye(2)).max() < 1e-12
        assert np.abs(u_b_minus.conj().T @ u_b_minus - np.eye(2)).max() < 1e-12
        for i, m in enumerate(ks.m):
            block = u_a.reshape(4, 4, 2)[:, i, :]
            assert np.abs(block - m).max() < 1e-14
        for i, m_idx in enumerate((0, 2)):
            block = u_b_plus.reshape(4, 2, 2)[:, i, :]
            assert np.abs(block - math.sqrt(2.0) * ks.m[m_idx]).max() < 1e-14


def test_dilation_column_amplitudes():
    """The even-bit isometry sends |0> to sqrt(2)[w|00,a1> + (w/2+v)|01,a2> + (w/2-v)|10,a2>]."""
    ks = build_kraus(ALPHA_MAX)
    _, u_b_plus, _ = build_dilations(ks)
    column = u_b_plus[:, 0]
    root2 = math.sqrt(2.0)
    assert abs(column[0] - root2 * ks.w) < 1e-14
    assert abs(column[3] - root2 * (ks.w / 2.0 + ks.v)) < 1e-14
    assert abs(column[5] - root2 * (ks.w / 2.0 - ks.v)) < 1e-14
    assert np.abs(np.delete(column, [0, 3, 5])).max() < 1e-14


def test_dilations_reject_corrupted_kraus():
    ks = build_kraus(0.5)
    bad = dataclasses.replace(ks, m=tuple(1.01 * m for m in ks.m))
    with pytest.raises(ValueError):
        build_dilations(bad)
