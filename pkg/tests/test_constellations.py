import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rfsynth.constellations import (
    MODULATION_NAMES,
    NUM_MODULATIONS,
    RaggedMessageError,
    UnsupportedModulationError,
    all_constellations,
    build_constellation,
    hard_demap,
    modulate_bits,
    symbols_to_points,
)


def gray(k):
    return k ^ (k >> 1)


def test_bpsk_points():
    c = build_constellation("BPSK")
    assert c.bits_per_symbol == 1
    np.testing.assert_allclose(c.points, [1.0, -1.0])


def test_qpsk_points():
    c = build_constellation("QPSK")
    assert c.bits_per_symbol == 2
    expected = {(s1 / np.sqrt(2), s2 / np.sqrt(2)) for s1 in (-1, 1) for s2 in (-1, 1)}
    got = {(round(p.real, 12), round(p.imag, 12)) for p in c.points}
    assert got == {(round(a, 12), round(b, 12)) for a, b in expected}


def test_16qam_points():
    c = build_constellation(8)
    assert c.name == "16QAM"
    expected = {(a / np.sqrt(10), b / np.sqrt(10)) for a in (-3, -1, 1, 3) for b in (-3, -1, 1, 3)}
    got = {(round(p.real, 12), round(p.imag, 12)) for p in c.points}
    assert got == {(round(a, 12), round(b, 12)) for a, b in expected}


def test_unknown_modulation():
    with pytest.raises(UnsupportedModulationError):
        build_constellation("OFDM")
    with pytest.raises(UnsupportedModulationError):
        build_constellation(13)


def test_unit_energy_all():
    for c in all_constellations():
        energy = np.mean(np.abs(c.points) ** 2)
        assert abs(energy - 1.0) < 1e-12, c.name


def test_points_distinct_and_labels_permutation():
    for c in all_constellations():
        assert len({(round(p.real, 9), round(p.imag, 9)) for p in c.points}) == c.size
        assert sorted(c.bit_labels.tolist()) == list(range(c.size))


def test_gray_adjacency_psk_rings():
    for name in ("BPSK", "8PSK", "16PSK"):
        c = build_constellation(name)
        m = c.size
        for k in range(m):
            a, b = c.bit_labels[k], c.bit_labels[(k + 1) % m]
            assert bin(a ^ b).count("1") == 1, (name, k)


def test_gray_adjacency_square_qams():
    for name in ("QPSK", "16QAM", "64QAM", "256QAM"):
        c = build_constellation(name)
        d2 = np.abs(c.points[:, None] - c.points[None, :]) ** 2
        np.fill_diagonal(d2, np.inf)
        dmin2 = d2.min()
        neighbors = np.argwhere(d2 < dmin2 * 1.0001)
        for i, j in neighbors:
            diff = int(c.bit_labels[i]) ^ int(c.bit_labels[j])
            assert bin(diff).count("1") == 1, (name, i, j)


def test_modulate_bpsk_bit0_is_plus_one():
    c = build_constellation("BPSK")
    seq = modulate_bits(np.array([0]), c)
    assert c.points[seq.indices[0]] == 1.0 + 0.0j


def test_modulate_qpsk_length():
    c = build_constellation("QPSK")
    seq = modulate_bits(np.array([0, 0, 1, 1]), c)
    assert len(seq) == 2


def test_modulate_16qam_against_lookup_table():
    # independent 16-entry table: I-major scan over ascending levels,
    # label = (gray(i_rank) << 2) | gray(q_rank)
    levels = [-3, -1, 1, 3]
    table_points, table_labels = [], []
    for a in range(4):
        for b in range(4):
            table_points.append(complex(levels[a], levels[b]) / np.sqrt(10))
            table_labels.append((gray(a) << 2) | gray(b))

    c = build_constellation("16QAM")
    bits = np.array([0, 1, 1, 0, 1, 0, 0, 1])
    seq = modulate_bits(bits, c)
    expected = [table_labels.index(0b0110), table_labels.index(0b1001)]
    points = symbols_to_points(seq, c)
    for got, want_idx in zip(points, expected):
        assert abs(got - table_points[want_idx]) < 1e-12


def test_modulate_ragged_rejected():
    c = build_constellation("QPSK")
    with pytest.raises(RaggedMessageError):
        modulate_bits(np.array([0, 1, 1]), c)


def test_demap_exact_points_identity():
    for c in all_constellations():
        seq, _ = hard_demap(c.points, c)
        np.testing.assert_array_equal(seq.indices, np.arange(c.size))


def test_demap_qpsk_first_quadrant():
    c = build_constellation("QPSK")
    seq, _ = hard_demap(np.array([0.9 + 0.8j]), c)
    target = (1 + 1j) / np.sqrt(2)
    assert abs(c.points[seq.indices[0]] - target) < 1e-12


def test_demap_tie_breaks_to_lowest_index():
    c = build_constellation("QPSK")
    seq, _ = hard_demap(np.array([0.0 + 0.0j]), c)
    assert seq.indices[0] == 0


def test_demap_perturbed_16qam_brute_force():
    c = build_constellation("16QAM")
    d2 = np.abs(c.points[:, None] - c.points[None, :]) ** 2
    np.fill_diagonal(d2, np.inf)
    half_dmin = 0.5 * np.sqrt(d2.min())

    rs = np.random.default_rng(4)
    idx = rs.integers(0, 16, size=100)
    angle = rs.uniform(0, 2 * np.pi, size=100)
    radius = rs.uniform(0, half_dmin * 0.999, size=100)
    rx = c.points[idx] + radius * np.exp(1j * angle)

    seq, _ = hard_demap(rx, c)
    # reference: explicit nearest-neighbor search per sample
    for k, value in enumerate(rx):
        ref = min(range(16), key=lambda j: abs(value - c.points[j]))
        assert seq.indices[k] == ref == idx[k]


@given(st.integers(min_value=0, max_value=NUM_MODULATIONS - 1), st.data())
@settings(max_examples=60, deadline=None)
def test_roundtrip_property(mod_id, data):
    c = build_constellation(mod_id)
    n_sym = data.draw(st.integers(min_value=1, max_value=32))
    bits = np.array(
        data.draw(
            st.lists(
                st.integers(min_value=0, max_value=1),
                min_size=n_sym * c.bits_per_symbol,
                max_size=n_sym * c.bits_per_symbol,
            )
        ),
        dtype=np.uint8,
    )
    seq = modulate_bits(bits, c)
    _, recovered = hard_demap(symbols_to_points(seq, c), c)
    np.testing.assert_array_equal(recovered, bits)


def test_roundtrip_exhaustive_all_alphabets():
    rs = np.random.default_rng(11)
    for c in all_constellations():
        bits = rs.integers(0, 2, size=64 * c.bits_per_symbol).astype(np.uint8)
        seq = modulate_bits(bits, c)
        back, recovered = hard_demap(symbols_to_points(seq, c), c)
        np.testing.assert_array_equal(back.indices, seq.indices)
        np.testing.assert_array_equal(recovered, bits)


def test_frozen_id_name_table():
    assert MODULATION_NAMES == {
        0: "OOK", 1: "4ASK", 2: "8ASK", 3: "BPSK", 4: "QPSK", 5: "8PSK",
        6: "16PSK", 7: "16APSK", 8: "16QAM", 9: "32QAM", 10: "64QAM",
        11: "128QAM", 12: "256QAM",
    }
