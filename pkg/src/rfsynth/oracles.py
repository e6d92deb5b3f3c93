"""Classical DSP reference receivers and closed-form error-rate curves.

These are the calibration instruments for the synthesizer: a known-
parameter (genie) demodulator that inverts the channel from stored
metadata, and textbook AWGN symbol-error-rate formulas to compare the
matched-filter chain against.
"""

from __future__ import annotations

import numpy as np
from scipy import special

from .channel import ChannelParams, FadingGain, awgn_profile, effective_gain, sample_channel
from .constellations import (
    Constellation,
    UnsupportedModulationError,
    build_constellation,
    hard_demap,
)
from .dataset import Example, TaskPreset, generate_example
from .rng import Stream
from .waveform import (
    DEFAULT_SPAN,
    IqFrame,
    edge_weights,
    matched_filter,
    rrc_taps,
    symbol_instants,
)

_GAIN_FLOOR = 1e-6


def qfunc(x):
    """Gaussian tail probability Q(x)."""
    return 0.5 * special.erfc(np.asarray(x, dtype=float) / np.sqrt(2.0))


def theoretical_ser(modulation: int | str, esn0_db: float) -> float:
    """Closed-form AWGN symbol error rate at Es/N0 (dB).

    Supports BPSK, QPSK, and the square QAM sizes; other alphabets have
    no simple closed form here.
    """
    c = build_constellation(modulation)
    snr = 10.0 ** (esn0_db / 10.0)
    if c.name == "BPSK":
        return float(qfunc(np.sqrt(2.0 * snr)))
    if c.name == "QPSK":
        q = qfunc(np.sqrt(snr))
        return float(2.0 * q - q * q)
    if c.name in ("16QAM", "64QAM", "256QAM"):
        m = c.size
        p = 2.0 * (1.0 - 1.0 / np.sqrt(m)) * qfunc(np.sqrt(3.0 * snr / (m - 1.0)))
        return float(1.0 - (1.0 - p) ** 2)
    raise UnsupportedModulationError(
        f"no closed-form symbol error rate for {c.name}; "
        "supported: BPSK, QPSK, 16QAM, 64QAM, 256QAM"
    )


def invert_channel(
    rx: IqFrame, params: ChannelParams, gain: FadingGain | None
) -> tuple[IqFrame, np.ndarray]:
    """Undo the carrier rotation and (known) fading gain.

    Returns the equalized frame and the indices of samples whose gain
    magnitude sat below 1e-6; those samples are only de-rotated, never
    divided.  `gain` must be the gain the channel actually applied
    (see channel.effective_gain); pass None when fading was disabled.
    """
    n = np.arange(len(rx))
    theta = 2.0 * np.pi * params.freq_offset * n / rx.sps + params.phase_offset
    out = rx.iq * np.exp(-1j * theta)
    if gain is None:
        return IqFrame.from_iq(out, rx.sps, rx.meta), np.empty(0, dtype=np.int64)
    if len(gain) != len(rx):
        raise ValueError("gain length does not match frame")
    g = gain.gain
    safe = np.abs(g) >= _GAIN_FLOOR
    out = np.where(safe, out / np.where(safe, g, 1.0), out)
    flagged = np.nonzero(~safe)[0]
    return IqFrame.from_iq(out, rx.sps, rx.meta), flagged


def tx_amplitude_reference(
    tx: IqFrame, pulse, n_symbols: int, sps: int, c: Constellation
) -> float:
    """Decision-sample amplitude implied by the stored clean frame.

    The shaper normalizes every frame to unit mean power, so constellation
    points arrive at the matched-filter output scaled by an unknown
    per-frame constant (times the per-symbol edge attenuation).  Recover
    it from the clean transmit frame: take tentative hard decisions at a
    moment-based scale, then least-squares fit the amplitude against
    those decisions (exact on a noiseless frame up to the residual ISI).
    """
    r = matched_filter(tx, pulse).iq[symbol_instants(n_symbols, sps)]
    w = edge_weights(pulse, n_symbols)
    s0 = np.sqrt(np.mean(np.abs(r / w) ** 2))
    if s0 == 0:
        return 1.0
    seq, _ = hard_demap(r / (s0 * w), c)
    ref = c.points[seq.indices] * w
    denom = np.sum(np.abs(ref) ** 2)
    if denom == 0:  # all-zero decisions (an OOK frame of offs)
        return s0
    return float(np.sum((np.conj(ref) * r).real) / denom)


def oracle_demod(
    ex: Example,
    correct_channel: bool = True,
    rrc_span: int = DEFAULT_SPAN,
    n_scatterers: int = 64,
) -> np.ndarray:
    """Matched-filter symbol decisions for one example.

    With correct_channel the known fading gain and carrier rotation are
    divided out first (the corrected mode); otherwise the receiver runs
    blind (raw mode).  Returns predicted symbol indices.
    """
    c = build_constellation(ex.modulation_id)
    pulse = rrc_taps(ex.beta, ex.sps, rrc_span)
    rx = ex.rx
    if correct_channel:
        gain = effective_gain(ex.channel, len(rx), n_scatterers)
        rx, _ = invert_channel(rx, ex.channel, gain)
    y = matched_filter(rx, pulse).iq[symbol_instants(ex.n_symbols, ex.sps)]
    w = edge_weights(pulse, ex.n_symbols)
    scale = tx_amplitude_reference(ex.tx, pulse, ex.n_symbols, ex.sps, c)
    seq, _ = hard_demap(y / (scale * w), c)
    return seq.indices


def awgn_ser_sweep(
    modulation: int | str,
    esn0_points: list[float],
    symbols_per_point: int,
    base_seed: int = 0,
    n_symbols: int = 256,
    sps: int = 4,
) -> list[dict]:
    """Monte-Carlo matched-filter SER over an AWGN-only channel.

    Exercises the full generate -> transmit -> demodulate chain and
    reports, per Es/N0 point, the empirical rate, the closed form, and
    the binomial standard error.
    """
    c = build_constellation(modulation)
    frames = (symbols_per_point + n_symbols - 1) // n_symbols
    results = []
    for point_idx, esn0 in enumerate(esn0_points):
        preset = TaskPreset(
            task="demod",
            frame_length=n_symbols * sps,
            modulations=(c.id,),
            profile=awgn_profile((esn0, esn0)),
            train_count=frames,
            val_count=0,
            sps_range=(sps, sps),
        )
        errors = total = 0
        for i in range(frames):
            ex = generate_example(preset, i, base_seed + 7919 * point_idx)
            pred = oracle_demod(ex, correct_channel=True)
            errors += int(np.sum(pred != ex.symbols.indices))
            total += ex.n_symbols
        ser = errors / total
        theory = theoretical_ser(c.id, esn0)
        stderr = np.sqrt(max(theory * (1.0 - theory), 1e-12) / total)
        results.append(
            {
                "modulation": c.name,
                "esn0_db": esn0,
                "ser": ser,
                "theory": theory,
                "stderr": stderr,
                "symbols": total,
                "errors": errors,
            }
        )
    return results


def estimate_esn0_db(tx: IqFrame, rx: IqFrame) -> tuple[float, float]:
    """Known-transmit moment estimator pieces: (signal*sps, noise power).

    Accumulate the two returned terms over frames and take
    10*log10(sum_signal / sum_noise) for the aggregate estimate.
    """
    signal = np.mean(np.abs(tx.iq) ** 2) * tx.sps
    noise = np.mean(np.abs(rx.iq - tx.iq) ** 2)
    return float(signal), float(noise)
