import numpy as np
import pytest

from ciama.bia import (apply_ic, bia_transmit, effective_channel, ic_matrix,
                       receive, supersymbol_schedule, user_effective_channels)
from ciama.channel import complex_gaussian, draw_channels, stream_rng


def test_schedule_default_pattern():
    sched = supersymbol_schedule(6)
    assert sched.shape == (6, 7)
    assert sched[2, 3] == 2                      # user 3 switches at slot 4
    assert np.sum(sched[2] == 2) == 1
    assert np.all(sched[:, 0] == 1)              # slot 1 all mode 1
    for k in range(6):
        assert sched[k, k + 1] == 2
        assert np.sum(sched[k] == 2) == 1        # minimal switching


def test_schedule_small_k():
    sched = supersymbol_schedule(2)
    assert sched.shape == (2, 3)
    assert sched[0, 1] == 2 and sched[1, 2] == 2


def test_schedule_rejects_other_mode_counts():
    with pytest.raises(ValueError):
        supersymbol_schedule(6, n_modes=3)


def test_ic_matrix_user1_exact():
    p = ic_matrix(1, 6)
    s = 1 / np.sqrt(6)
    expected = np.array([
        [s, 0, -s, -s, -s, -s, -s],
        [0, 1, 0, 0, 0, 0, 0],
    ])
    assert np.allclose(p, expected, atol=1e-15)


def test_ic_matrix_user2_rows():
    p = ic_matrix(2, 6)
    s = 1 / np.sqrt(6)
    assert np.allclose(p[1], [0, 0, 1, 0, 0, 0, 0])
    assert np.allclose(p[0], [s, -s, 0, -s, -s, -s, -s])


def test_ic_matrix_range_check():
    with pytest.raises(ValueError):
        ic_matrix(0, 6)
    with pytest.raises(ValueError):
        ic_matrix(7, 6)


def test_transmit_structure():
    rng = stream_rng(1)
    x = complex_gaussian(rng, (6, 4, 2))
    tx = bia_transmit(x)
    assert tx.shape == (4, 7, 2)
    assert np.allclose(tx[:, 0], x.sum(axis=0).reshape(4, 2))
    for k in range(6):
        assert np.allclose(tx[:, k + 1], x[k])
    # slot-1 equals the sum of the repeats
    assert np.allclose(tx[:, 0], tx[:, 1:].sum(axis=1))


def test_transmit_single_active_user():
    x = np.zeros((6, 4, 2), dtype=complex)
    x[0, :, 0] = 1.0
    tx = bia_transmit(x)
    assert np.allclose(tx[:, 0], x[0])
    assert np.allclose(tx[:, 1], x[0])
    assert np.allclose(tx[:, 2:], 0)


def test_symbol_transmitted_twice_energy():
    rng = stream_rng(2)
    x = complex_gaussian(rng, (6, 4, 2))
    tx = bia_transmit(x)
    for k in range(6):
        own = np.sum(np.abs(tx[:, k + 1]) ** 2)
        assert own == pytest.approx(np.sum(np.abs(x[k]) ** 2))
    # slot 1 re-sends every user's symbol once more (energy in expectation;
    # here exact via orthogonality of the decomposition)
    total = np.sum(np.abs(tx[:, 1:]) ** 2)
    assert total == pytest.approx(np.sum(np.abs(x) ** 2))


def test_receive_matches_block_channel_oracle():
    # independent oracle: assemble the full 7x7 supersymbol channel matrix per
    # tone and multiply, instead of the slot-by-slot path
    real = draw_channels(3, 6, 4, 2)
    rng = stream_rng(3, 1)
    x = complex_gaussian(rng, (6, 4, 2))
    tx = bia_transmit(x)
    sched = supersymbol_schedule(6)
    y = receive(tx, real, sched)
    for k in range(6):
        for j in range(4):
            big = np.zeros((7, 14), dtype=complex)
            for t in range(7):
                big[t, 2 * t:2 * t + 2] = real.h[k, j, sched[k, t] - 1]
            stacked = tx[j].reshape(14)
            assert np.allclose(y[k, j], big @ stacked, atol=1e-12)


def test_receive_zero_transmit_is_noise():
    real = draw_channels(4, 6, 4, 2)
    sched = supersymbol_schedule(6)
    noise = complex_gaussian(stream_rng(4, 1), (6, 4, 7))
    y = receive(np.zeros((4, 7, 2), dtype=complex), real, sched, noise)
    assert np.allclose(y, noise)


def test_mode2_slot_isolates_own_symbol():
    real = draw_channels(5, 6, 4, 2)
    sched = supersymbol_schedule(6)
    x = np.zeros((6, 4, 2), dtype=complex)
    k = 3
    x[k] = complex_gaussian(stream_rng(5, 1), (4, 2))
    y = receive(bia_transmit(x), real, sched)
    for j in range(4):
        expected = real.h[k, j, 1] @ x[k, j]
        assert np.isclose(y[k, j, k + 1], expected)


def test_zero_leakage_property():
    # post-IC signal of user k ignores every other user's symbols
    rng = stream_rng(6)
    for trial in range(50):
        real = draw_channels(stream_rng(6, trial), 6, 4, 2)
        sched = supersymbol_schedule(6)
        x = complex_gaussian(rng, (6, 4, 2))
        for k in (1, 2, 6):
            p = ic_matrix(k, 6)
            alone = x.copy()
            alone[np.arange(6) != k - 1] = 0
            y_full = apply_ic(receive(bia_transmit(x), real, sched)[k - 1], p)
            y_alone = apply_ic(receive(bia_transmit(alone), real, sched)[k - 1], p)
            assert np.max(np.abs(y_full - y_alone)) < 1e-12


def test_zero_leakage_generalized_k():
    rng = stream_rng(7)
    for K in (2, 3, 4):
        real = draw_channels(stream_rng(7, K), K, 2, 2)
        sched = supersymbol_schedule(K)
        x = complex_gaussian(rng, (K, 2, 2))
        for k in range(1, K + 1):
            p = ic_matrix(k, K)
            alone = x.copy()
            alone[np.arange(K) != k - 1] = 0
            y_full = apply_ic(receive(bia_transmit(x), real, sched)[k - 1], p)
            y_alone = apply_ic(receive(bia_transmit(alone), real, sched)[k - 1], p)
            assert np.max(np.abs(y_full - y_alone)) < 1e-12


def test_post_ic_noise_structure():
    # row 1 = (z(1) - sum_{t not in {1, k+1}} z(t)) / sqrt(6); row 2 = z(k+1)
    z = complex_gaussian(stream_rng(8), (4, 7))
    p = ic_matrix(1, 6)
    out = apply_ic(z, p)
    expected_row1 = (z[:, 0] - z[:, 2:].sum(axis=1)) / np.sqrt(6)
    assert np.allclose(out[:, 0], expected_row1)
    assert np.allclose(out[:, 1], z[:, 1])


def test_post_ic_noise_whiteness():
    n0 = 1.7
    z = complex_gaussian(stream_rng(9), (100_000, 1, 7), n0)
    p = ic_matrix(2, 6)
    out = apply_ic(z, p)[:, 0, :]
    cov = out.T.conj() @ out / out.shape[0]
    assert np.max(np.abs(cov - n0 * np.eye(2))) < 0.02 * n0


def test_effective_channel_rows_and_scaling():
    h1 = np.array([1.0 + 0j, 0.0])
    h2 = np.array([1.0 + 0j, 0.0])
    H = effective_channel(h1, h2)
    assert np.allclose(H, [[1 / np.sqrt(6), 0], [1, 0]])
    assert np.linalg.matrix_rank(H) == 1
    assert np.linalg.norm(H[0]) == pytest.approx(np.linalg.norm(h1) / np.sqrt(6))


def test_effective_channel_full_rank_generically():
    real = draw_channels(10, 6, 4, 2)
    h_eff = user_effective_channels(real, 1)
    ranks = np.linalg.matrix_rank(h_eff)
    assert np.all(ranks == 2)


def test_equivalent_channel_correctness():
    # noiseless apply_ic(receive(bia_transmit(x))) == H_k^j x_k^j exactly
    rng = stream_rng(11)
    for trial in range(100):
        real = draw_channels(stream_rng(11, trial), 6, 4, 2)
        sched = supersymbol_schedule(6)
        x = complex_gaussian(rng, (6, 4, 2))
        y = receive(bia_transmit(x), real, sched)
        for k in (1, 4):
            y_hat = apply_ic(y[k - 1], ic_matrix(k, 6))
            h_eff = user_effective_channels(real, k)
            expected = np.einsum("jrc,jc->jr", h_eff, x[k - 1])
            assert np.max(np.abs(y_hat - expected)) < 1e-12
