"""Transmission-channel model: carrier offset, Rayleigh fading, AWGN.

Parameter conventions
---------------------
* Frequency offset is a fraction of the data rate; one symbol period is
  1 / data-rate, so the per-sample phase increment is 2*pi*df/sps.
* SNR is Es/N0 in dB.  Frames leave the shaper with unit mean sample
  power, so Es = sps and the per-sample complex noise variance for a
  requested ratio r is sps / 10**(r/10).  snr_db = inf means noiseless.
* Fading strength eta is the (max Doppler) x (message duration) product;
  dimensionless time tau runs 0..1 across the frame.

Effects compose as fading -> carrier offset -> noise.  Profiles whose
receiver is assumed to carry a phase-tracking loop (the mild channel)
apply only the fading envelope: the loop removes the fading phase, and
the residual phase/frequency offsets drawn from the profile model what
the loop leaves behind.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .rng import Stream
from .waveform import IqFrame

NOISELESS = float("inf")

DEFAULT_SCATTERERS = 64


@dataclass(frozen=True)
class ChannelProfile:
    name: str
    eta_range: tuple[float, float]
    phase_range: tuple[float, float]
    freq_range: tuple[float, float]
    snr_range: tuple[float, float]
    fading_enabled: bool
    fading_phase_corrected: bool = False

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "eta_range": list(self.eta_range),
            "phase_range": list(self.phase_range),
            "freq_range": list(self.freq_range),
            "snr_range": list(self.snr_range),
            "fading_enabled": self.fading_enabled,
            "fading_phase_corrected": self.fading_phase_corrected,
        }

    @classmethod
    def from_json(cls, d: dict) -> "ChannelProfile":
        return cls(
            name=d["name"],
            eta_range=tuple(d["eta_range"]),
            phase_range=tuple(d["phase_range"]),
            freq_range=tuple(d["freq_range"]),
            snr_range=tuple(d["snr_range"]),
            fading_enabled=bool(d["fading_enabled"]),
            fading_phase_corrected=bool(d.get("fading_phase_corrected", False)),
        )


PROFILES: dict[str, ChannelProfile] = {
    "harsh": ChannelProfile(
        name="harsh",
        eta_range=(0.1, 1.0),
        phase_range=(-np.pi, np.pi),
        freq_range=(-0.01, 0.01),
        snr_range=(-10.0, 30.0),
        fading_enabled=True,
    ),
    "medium": ChannelProfile(
        name="medium",
        eta_range=(0.0, 0.0),
        phase_range=(-np.pi / 4, np.pi / 4),
        freq_range=(-0.01, 0.01),
        snr_range=(-2.0, 40.0),
        fading_enabled=False,
    ),
    "mild": ChannelProfile(
        name="mild",
        eta_range=(0.1, 1.0),
        phase_range=(-np.deg2rad(10.0), np.deg2rad(10.0)),
        freq_range=(-1e-4, 1e-4),
        snr_range=(-10.0, 40.0),
        fading_enabled=True,
        fading_phase_corrected=True,
    ),
}


@dataclass(frozen=True)
class ChannelParams:
    phase_offset: float  # radians
    freq_offset: float  # fraction of data rate
    snr_db: float  # Es/N0 in dB; inf = noiseless
    fading_eta: float
    fading_enabled: bool
    fading_seed: int
    fading_phase_corrected: bool = False

    def __post_init__(self):
        if self.fading_eta < 0:
            raise ValueError("fading_eta must be nonnegative")
        if np.isnan(self.snr_db):
            raise ValueError("snr_db must be finite or +inf (noiseless)")


NEUTRAL_PARAMS = ChannelParams(0.0, 0.0, NOISELESS, 0.0, False, 0)


@dataclass(frozen=True)
class FadingGain:
    x: np.ndarray
    y: np.ndarray
    eta: float
    n_scatterers: int

    def __len__(self) -> int:
        return len(self.x)

    @property
    def gain(self) -> np.ndarray:
        return self.x + 1j * self.y

    def envelope_only(self) -> "FadingGain":
        """Gain with the phase stripped (a tracking loop has removed it)."""
        return FadingGain(np.abs(self.gain), np.zeros_like(self.x), self.eta, self.n_scatterers)


def apply_cfo(frame: IqFrame, phi: float, df: float) -> IqFrame:
    """Rotate each sample by 2*pi*df*(n/sps) + phi (oscillator mismatch)."""
    n = np.arange(len(frame))
    theta = 2.0 * np.pi * df * n / frame.sps + phi
    rot = np.exp(1j * theta)
    return IqFrame.from_iq(frame.iq * rot, frame.sps, frame.meta)


def jakes_gain_from_phases(
    n_samples: int, eta: float, alphas: np.ndarray, betas: np.ndarray
) -> FadingGain:
    """Sum-of-scatterers gain with explicit per-scatterer phases.

    Scatterers sit at angles 2*pi*n/N for n = 1..N; scatterer n
    contributes cos(2*pi*eta*tau*cos(angle_n) + alpha_n) to the real
    part and the matching sine with beta_n to the imaginary part, all
    scaled by 1/sqrt(N).  tau = sample/n_samples runs 0..1 per frame.
    """
    n_scatterers = len(alphas)
    if len(betas) != n_scatterers:
        raise ValueError("alphas and betas must have equal length")
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    if n_scatterers < 2:
        raise ValueError("need at least 2 scatterers")
    theta = 2.0 * np.pi * np.arange(1, n_scatterers + 1) / n_scatterers
    tau = np.arange(n_samples)[:, None] / n_samples
    arg = 2.0 * np.pi * eta * tau * np.cos(theta)[None, :]
    scale = 1.0 / np.sqrt(n_scatterers)
    x = scale * np.sum(np.cos(arg + alphas[None, :]), axis=1)
    y = scale * np.sum(np.sin(arg + betas[None, :]), axis=1)
    return FadingGain(x, y, eta, n_scatterers)


def jakes_gain(
    n_samples: int,
    eta: float,
    n_scatterers: int = DEFAULT_SCATTERERS,
    seed: int = 0,
) -> FadingGain:
    """Seeded Rayleigh gain: phases come from a SplitMix64 stream.

    The stream yields N alphas then N betas, each uniform on [0, 2*pi).
    Mean square gain is 1.  Deterministic given (seed, N, eta, n_samples).
    """
    stream = Stream(seed)
    alphas = stream.uniform(0.0, 2.0 * np.pi, n=n_scatterers)
    betas = stream.uniform(0.0, 2.0 * np.pi, n=n_scatterers)
    return jakes_gain_from_phases(n_samples, eta, alphas, betas)


def apply_fading(frame: IqFrame, gain: FadingGain) -> IqFrame:
    """Per-sample complex multiplication by the fading gain."""
    if len(gain) != len(frame):
        raise ValueError(f"gain length {len(gain)} != frame length {len(frame)}")
    return IqFrame.from_iq(frame.iq * gain.gain, frame.sps, frame.meta)


def add_awgn(frame: IqFrame, snr_db: float, rng: Stream) -> IqFrame:
    """Add circular complex Gaussian noise calibrated to Es/N0 = snr_db.

    Unit mean frame power and sps samples per symbol give Es = sps, so
    the per-sample complex noise variance is sps / 10**(snr_db/10).
    The noiseless sentinel (inf) returns the frame unchanged and draws
    nothing from the stream.
    """
    if np.isinf(snr_db):
        return frame.copy()
    sigma2 = frame.sps / 10.0 ** (snr_db / 10.0)
    z = rng.normal(2 * len(frame))
    s = np.sqrt(sigma2 / 2.0)
    return IqFrame(
        frame.i + s * z[: len(frame)],
        frame.q + s * z[len(frame) :],
        frame.sps,
        frame.meta,
    )


def _draw_range(rng: Stream, lo: float, hi: float) -> float:
    # always consumes one word; degenerate ranges return their point value
    # exactly (which also keeps an infinite noiseless bound representable)
    u = rng.uniform()
    if lo == hi:
        return lo
    return lo + u * (hi - lo)


def sample_channel(profile: ChannelProfile, rng: Stream) -> ChannelParams:
    """Draw one parameter set from a profile.

    Draw order (part of the dataset format contract): eta, phase, freq,
    snr, fading seed; the eta and seed draws are skipped entirely when
    the profile has no fading.
    """
    eta = _draw_range(rng, *profile.eta_range) if profile.fading_enabled else 0.0
    phase = _draw_range(rng, *profile.phase_range)
    freq = _draw_range(rng, *profile.freq_range)
    snr = _draw_range(rng, *profile.snr_range)
    seed = rng.u64() if profile.fading_enabled else 0
    return ChannelParams(
        phase_offset=phase,
        freq_offset=freq,
        snr_db=snr,
        fading_eta=eta,
        fading_enabled=profile.fading_enabled,
        fading_seed=seed,
        fading_phase_corrected=profile.fading_phase_corrected,
    )


def effective_gain(
    params: ChannelParams, n_samples: int, n_scatterers: int = DEFAULT_SCATTERERS
) -> FadingGain | None:
    """The gain actually applied by transmit() for these parameters."""
    if not params.fading_enabled:
        return None
    gain = jakes_gain(n_samples, params.fading_eta, n_scatterers, params.fading_seed)
    return gain.envelope_only() if params.fading_phase_corrected else gain


def transmit(
    tx: IqFrame,
    params: ChannelParams,
    rng: Stream,
    n_scatterers: int = DEFAULT_SCATTERERS,
) -> IqFrame:
    """Propagate a frame: fading (if enabled), carrier offset, then noise."""
    rx = tx
    gain = effective_gain(params, len(tx), n_scatterers)
    if gain is not None:
        rx = apply_fading(rx, gain)
    rx = apply_cfo(rx, params.phase_offset, params.freq_offset)
    return add_awgn(rx, params.snr_db, rng)


def neutral_params(snr_db: float = NOISELESS) -> ChannelParams:
    """No fading, no rotation; optionally AWGN only."""
    return replace(NEUTRAL_PARAMS, snr_db=snr_db)


def awgn_profile(snr_range: tuple[float, float]) -> ChannelProfile:
    """AWGN-only profile (used by calibration sweeps and oracle tests)."""
    return ChannelProfile(
        name="awgn",
        eta_range=(0.0, 0.0),
        phase_range=(0.0, 0.0),
        freq_range=(0.0, 0.0),
        snr_range=snr_range,
        fading_enabled=False,
    )
