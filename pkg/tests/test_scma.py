import numpy as np
import pytest

from ciama.scma import (Codebook, build_default_codebooks, default_indicator,
                        load_codebook, save_codebook, scma_encode)

EXPECTED_F = np.array([
    [1, 1, 1, 0, 0, 0],
    [1, 0, 0, 1, 1, 0],
    [0, 1, 0, 1, 0, 1],
    [0, 0, 1, 0, 1, 1],
])


def test_default_indicator_exact():
    assert np.array_equal(default_indicator(), EXPECTED_F)


def test_indicator_weights():
    F = default_indicator()
    assert np.all(F.sum(axis=1) == 3)   # row weight d_f
    assert np.all(F.sum(axis=0) == 2)   # column weight d_v
    assert np.array_equal(np.flatnonzero(F[:, 0]), [0, 1])  # layer 1 support


def test_codeword_supports_match_indicator():
    cb = build_default_codebooks()
    for i in range(cb.n_layers):
        for b in range(cb.n_points):
            support = np.abs(cb.codewords[i, b]) > 1e-12
            assert np.array_equal(support, cb.indicator[:, i].astype(bool))


def test_codeword_energy_unit():
    cb = build_default_codebooks()
    energies = np.sum(np.abs(cb.codewords) ** 2, axis=2)
    assert np.max(np.abs(energies - 1.0)) < 1e-12


def test_layer1_bit0_codeword():
    cb = build_default_codebooks()
    expected = np.array([1, 1, 0, 0]) / np.sqrt(2)
    assert np.allclose(cb.codewords[0, 0], expected, atol=1e-15)


def test_shared_tone_phases_distinct_mod_pi():
    cb = build_default_codebooks()
    F = cb.indicator
    for tone in range(cb.n_tones):
        layers = np.flatnonzero(F[tone])
        phases = [np.angle(cb.codewords[i, 0, tone]) % np.pi for i in layers]
        for a in range(len(phases)):
            for b in range(a + 1, len(phases)):
                gap = abs(phases[a] - phases[b])
                assert min(gap, np.pi - gap) > 1e-6


def test_no_small_difference_collisions_per_tone():
    # every +/-1 combination of a tone's resident layer entries is distinct,
    # so no subset of layer flips can hide from a tone it touches
    cb = build_default_codebooks()
    F = cb.indicator
    for tone in range(cb.n_tones):
        layers = np.flatnonzero(F[tone])
        entries = np.array([cb.codewords[i, 0, tone] for i in layers])
        for signs in np.ndindex(*(3,) * len(layers)):
            coeff = np.array(signs) - 1     # each in {-1, 0, 1}
            if not np.any(coeff):
                continue
            assert abs(np.dot(coeff, entries)) > 1e-9


def test_encode_definition():
    cb = build_default_codebooks()
    bits = np.zeros(6, dtype=int)
    expected = cb.codewords[:, 0, :].sum(axis=0)
    assert np.allclose(scma_encode(bits, cb), expected)


def test_encode_bit_flip_touches_only_support():
    cb = build_default_codebooks()
    rng = np.random.default_rng(2)
    for _ in range(20):
        bits = rng.integers(0, 2, 6)
        i = rng.integers(0, 6)
        flipped = bits.copy()
        flipped[i] ^= 1
        diff = scma_encode(flipped, cb) - scma_encode(bits, cb)
        changed = np.abs(diff) > 1e-12
        assert np.array_equal(changed, cb.indicator[:, i].astype(bool))


def test_each_tone_has_three_contributors():
    cb = build_default_codebooks()
    bits0 = np.zeros(6, dtype=int)
    per_layer = np.abs(cb.codewords[:, 0, :]) > 1e-12
    assert np.all(per_layer.sum(axis=0) == 3)
    # and the superposed magnitude on each tone never exceeds 3 entries' worth
    assert np.all(np.abs(scma_encode(bits0, cb)) <= 3 / np.sqrt(2) + 1e-12)


def test_encode_rejects_wrong_bit_count():
    cb = build_default_codebooks()
    with pytest.raises(ValueError):
        scma_encode(np.zeros(5, dtype=int), cb)


def test_encode_batched_matches_loop():
    cb = build_default_codebooks()
    rng = np.random.default_rng(3)
    bits = rng.integers(0, 2, (10, 6))
    batch = scma_encode(bits, cb)
    for n in range(10):
        assert np.allclose(batch[n], scma_encode(bits[n], cb))


def test_codebook_file_round_trip(tmp_path):
    cb = build_default_codebooks()
    path = tmp_path / "cb.txt"
    save_codebook(cb, path)
    loaded = load_codebook(path)
    assert np.allclose(loaded.codewords, cb.codewords)
    assert np.array_equal(loaded.indicator, cb.indicator)


def test_load_codebook_rejects_bad_energy(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("1.0,0.0 1.0,0.0 0.0,0.0 0.0,0.0\n"
                    "-1.0,0.0 -1.0,0.0 0.0,0.0 0.0,0.0\n")
    with pytest.raises(ValueError):
        load_codebook(path)


def test_load_codebook_rejects_malformed(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("nonsense line\n")
    with pytest.raises(ValueError):
        load_codebook(path)


def test_codebook_validates_support_against_indicator():
    cb = build_default_codebooks()
    wrong = cb.codewords.copy()
    wrong[0, 0, 2] = 0.5
    with pytest.raises(ValueError):
        Codebook(codewords=wrong, indicator=cb.indicator)
