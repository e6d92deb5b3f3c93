import numpy as np
import pytest
from scipy import special

from rfsynth.channel import (
    NOISELESS,
    PROFILES,
    awgn_profile,
    jakes_gain,
    neutral_params,
    sample_channel,
    transmit,
)
from rfsynth.channel import FadingGain
from rfsynth.constellations import (
    UnsupportedModulationError,
    all_constellations,
    build_constellation,
    modulate_bits,
)
from rfsynth.dataset import Example, TaskPreset, generate_example
from rfsynth.oracles import (
    awgn_ser_sweep,
    estimate_esn0_db,
    invert_channel,
    oracle_demod,
    theoretical_ser,
)
from rfsynth.rng import Stream
from rfsynth.waveform import DEFAULT_SPAN, pad_frame, rrc_taps, shape


def q(x):
    return 0.5 * special.erfc(x / np.sqrt(2.0))


def noiseless_example(mod, n_symbols=64, sps=8, beta=0.3, seed=0):
    c = build_constellation(mod)
    rs = np.random.default_rng(seed)
    bits = rs.integers(0, 2, size=n_symbols * c.bits_per_symbol).astype(np.uint8)
    symbols = modulate_bits(bits, c)
    tx = shape(symbols, c, rrc_taps(beta, sps, DEFAULT_SPAN))
    return Example(
        tx=tx,
        rx=tx.copy(),
        bits=bits,
        symbols=symbols,
        modulation_id=c.id,
        channel=neutral_params(),
        sps=sps,
        n_symbols=n_symbols,
        beta=beta,
        example_seed=seed,
    )


class TestTheoreticalSer:
    def test_bpsk_vanishes_at_high_snr(self):
        assert theoretical_ser("BPSK", 60.0) < 1e-300
        assert theoretical_ser("BPSK", 20.0) < theoretical_ser("BPSK", 0.0)

    def test_bpsk_textbook_anchor(self):
        # Eb/N0 = 9.6 dB is the classic 1e-5 BER point (BER = SER for BPSK)
        v = theoretical_ser("BPSK", 9.6)
        assert abs(v - 1.0e-5) < 3e-6
        assert v == pytest.approx(q(np.sqrt(2 * 10**0.96)), rel=1e-12)

    def test_qpsk_closed_form(self):
        x = q(np.sqrt(10.0))
        assert theoretical_ser("QPSK", 10.0) == pytest.approx(2 * x - x * x, rel=1e-12)

    def test_square_qam_closed_form(self):
        snr = 10 ** (14.0 / 10.0)
        p = 2 * (1 - 0.25) * q(np.sqrt(3 * snr / 15))
        assert theoretical_ser("16QAM", 14.0) == pytest.approx(1 - (1 - p) ** 2, rel=1e-12)

    def test_unsupported(self):
        with pytest.raises(UnsupportedModulationError):
            theoretical_ser("8PSK", 10.0)
        with pytest.raises(UnsupportedModulationError):
            theoretical_ser("32QAM", 10.0)


class TestInvertChannel:
    def test_noiseless_roundtrip(self):
        preset = TaskPreset(
            task="amc", frame_length=512, modulations=(4,), profile=PROFILES["harsh"],
            train_count=4, val_count=0, sps_range=(16, 16),
        )
        for i in range(4):
            ex = generate_example(preset, i, 17)
            if np.isinf(ex.channel.snr_db):
                continue
            # replay the channel without noise, then invert exactly
            noiseless = transmit(ex.tx, ex.channel.__class__(**{**ex.channel.__dict__, "snr_db": NOISELESS}), Stream(0))
            from rfsynth.channel import effective_gain

            gain = effective_gain(ex.channel, len(ex.tx))
            back, flagged = invert_channel(noiseless, ex.channel, gain)
            assert len(flagged) == 0 or np.min(np.abs(gain.gain[flagged])) < 1e-6
            ok = np.setdiff1d(np.arange(len(ex.tx)), flagged)
            assert np.max(np.abs(back.iq[ok] - ex.tx.iq[ok])) < 1e-9

    def test_residual_tracks_noise_at_30db(self):
        ex = generate_example(
            TaskPreset(
                task="demod", frame_length=1024, modulations=(4,),
                profile=awgn_profile((30.0, 30.0)), train_count=1, val_count=0,
                sps_range=(4, 4),
            ),
            0,
            5,
        )
        back, _ = invert_channel(ex.rx, ex.channel, None)
        residual_rms = np.sqrt(np.mean(np.abs(back.iq - ex.tx.iq) ** 2))
        expected = np.sqrt(ex.sps / 10**3.0)
        assert residual_rms == pytest.approx(expected, rel=0.1)

    def test_zero_gain_samples_flagged(self):
        from rfsynth.waveform import IqFrame

        frame = IqFrame(np.ones(8), np.zeros(8), 4)
        x = np.ones(8)
        x[3] = 1e-9
        gain = FadingGain(x, np.zeros(8), 0.5, 64)
        back, flagged = invert_channel(frame, neutral_params(), gain)
        assert flagged.tolist() == [3]
        assert back.iq[3] == pytest.approx(1.0)  # de-rotated only, not divided


class TestOracleDemod:
    def test_exact_recovery_noiseless_all_modulations(self):
        for c in all_constellations():
            ex = noiseless_example(c.id, seed=c.id)
            pred = oracle_demod(ex)
            np.testing.assert_array_equal(pred, ex.symbols.indices, err_msg=c.name)

    def test_awgn_qpsk_matches_theory(self):
        points = [2.0, 6.0]
        results = awgn_ser_sweep("QPSK", points, symbols_per_point=30_000, base_seed=3)
        for r in results:
            assert abs(r["ser"] - r["theory"]) < 3 * r["stderr"], r

    def test_uncorrected_harsh_is_worse(self):
        preset = TaskPreset(
            task="demod", frame_length=1024, modulations=(4,),
            profile=PROFILES["harsh"], train_count=30, val_count=0, sps_range=(4, 4),
        )
        corrected = raw = total = 0
        for i in range(30):
            ex = generate_example(preset, i, 101)
            truth = ex.symbols.indices
            corrected += int(np.sum(oracle_demod(ex, True) != truth))
            raw += int(np.sum(oracle_demod(ex, False) != truth))
            total += len(truth)
        assert raw > corrected
        assert raw / total > 0.3  # a blind slicer under full rotation is near chance

    def test_oracle_on_high_snr_mild_channel(self):
        preset = TaskPreset(
            task="demod", frame_length=1024, modulations=(3,),
            profile=PROFILES["mild"], train_count=10, val_count=0, sps_range=(4, 4),
        )
        errors = total = 0
        for i in range(10):
            ex = generate_example(preset, i, 7)
            if ex.channel.snr_db < 25:
                continue
            pred = oracle_demod(ex, correct_channel=True)
            errors += int(np.sum(pred != ex.symbols.indices))
            total += ex.n_symbols
        if total:
            assert errors / total < 0.02


class TestEsn0Estimator:
    def test_recovers_requested_snr(self):
        preset = TaskPreset(
            task="amc", frame_length=512, modulations=(4,),
            profile=awgn_profile((10.0, 10.0)), train_count=300, val_count=0,
            sps_range=(16, 16),
        )
        sig = noise = 0.0
        for i in range(300):
            ex = generate_example(preset, i, 9)
            s, nz = estimate_esn0_db(ex.tx, ex.rx)
            sig += s
            noise += nz
        est = 10 * np.log10(sig / noise)
        assert abs(est - 10.0) < 0.15
