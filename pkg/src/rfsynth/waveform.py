"""Root-raised-cosine pulse shaping between symbols and sample frames.

Frames are complex baseband held as separate I/Q float vectors.  The
symbol clock convention: symbol k peaks at sample k*sps + sps//2, so a
frame of n symbols occupies exactly n*sps samples with the filter group
delay compensated.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .constellations import Constellation, SymbolSequence, symbols_to_points


class UnsupportedBetaError(ValueError):
    """Raised for excess-bandwidth values outside (0, 1]."""


# Filter half-length in symbols used for dataset generation.  Keeps the
# truncation ISI of the RRC self-convolution under 1e-3 of the center for
# every beta >= 0.2 (span 8 only reaches ~6e-3 at beta near 0.2).
DEFAULT_SPAN = 24


def _conv_keep_length(x: np.ndarray, taps: np.ndarray) -> np.ndarray:
    """Zero-padded convolution trimmed to len(x), group delay removed."""
    half = len(taps) // 2
    return np.convolve(x, taps, mode="full")[half : half + len(x)]


@dataclass(frozen=True)
class PulseShape:
    beta: float
    sps: int
    span: int  # half-length in symbols; taps cover [-span, +span]
    taps: np.ndarray  # length 2*span*sps + 1, unit energy

    def __len__(self) -> int:
        return len(self.taps)


@dataclass
class IqFrame:
    i: np.ndarray
    q: np.ndarray
    sps: int
    meta: dict | None = field(default=None)

    def __post_init__(self):
        self.i = np.asarray(self.i, dtype=np.float64)
        self.q = np.asarray(self.q, dtype=np.float64)
        if self.i.shape != self.q.shape:
            raise ValueError("I and Q lengths differ")

    def __len__(self) -> int:
        return len(self.i)

    @property
    def iq(self) -> np.ndarray:
        """Complex view (copy) of the frame."""
        return self.i + 1j * self.q

    @classmethod
    def from_iq(cls, iq: np.ndarray, sps: int, meta: dict | None = None) -> "IqFrame":
        iq = np.asarray(iq, dtype=complex)
        return cls(iq.real.copy(), iq.imag.copy(), sps, meta)

    def copy(self) -> "IqFrame":
        return IqFrame(self.i.copy(), self.q.copy(), self.sps, dict(self.meta) if self.meta else None)


def rrc_response(t, beta: float):
    """Root-raised-cosine impulse response at time t (in symbol periods).

    Singular points t = 0 and |t| = 1/(4*beta) are evaluated by their
    analytic limits.  No amplitude scaling is applied here.
    """
    t = np.asarray(t, dtype=np.float64)
    out = np.empty_like(t)

    at_zero = np.abs(t) < 1e-10
    at_pole = np.abs(np.abs(t) - 1.0 / (4.0 * beta)) < 1e-10
    regular = ~(at_zero | at_pole)

    out[at_zero] = 1.0 - beta + 4.0 * beta / np.pi

    if np.any(at_pole):
        a = np.pi / (4.0 * beta)
        out[at_pole] = (beta / np.sqrt(2.0)) * (
            (1.0 + 2.0 / np.pi) * np.sin(a) + (1.0 - 2.0 / np.pi) * np.cos(a)
        )

    tr = t[regular]
    num = np.sin(np.pi * tr * (1.0 - beta)) + 4.0 * beta * tr * np.cos(np.pi * tr * (1.0 + beta))
    den = np.pi * tr * (1.0 - (4.0 * beta * tr) ** 2)
    out[regular] = num / den
    return out


def rrc_taps(beta: float, sps: int, span: int) -> PulseShape:
    """Build the RRC filter: 2*span*sps + 1 taps, unit energy.

    Unit tap energy makes the self-convolution (the raised cosine) equal
    to 1 at its center, which keeps matched-filter noise bookkeeping
    trivial.  beta = 0 is rejected: the undamped sinc tails violate the
    finite-span ISI bound.
    """
    if not 0.0 < beta <= 1.0:
        raise UnsupportedBetaError(f"unsupported beta {beta}; need 0 < beta <= 1")
    if sps < 1 or span < 1:
        raise ValueError("sps and span must be positive")
    n = np.arange(2 * span * sps + 1)
    t = (n - span * sps) / sps
    taps = rrc_response(t, beta) / np.sqrt(sps)
    taps = taps / np.sqrt(np.sum(taps**2))
    return PulseShape(beta, sps, span, taps)


def shape(symbols: SymbolSequence, c: Constellation, pulse: PulseShape) -> IqFrame:
    """NRZ impulse placement plus RRC filtering.

    Returns exactly n_symbols*sps samples, group delay removed, with the
    frame re-normalized to unit mean sample power (exactly, per frame).
    """
    points = symbols_to_points(symbols, c)
    n = len(points)
    sps = pulse.sps
    impulses = np.zeros(n * sps, dtype=complex)
    impulses[np.arange(n) * sps + sps // 2] = points
    out = _conv_keep_length(impulses, pulse.taps)
    power = np.mean(np.abs(out) ** 2)
    if power > 0:
        out /= np.sqrt(power)
    return IqFrame.from_iq(out, sps)


def matched_filter(rx: IqFrame, pulse: PulseShape) -> IqFrame:
    """Receive-side RRC (conjugate pulse is real): length-preserving."""
    out = _conv_keep_length(rx.iq, pulse.taps)
    return IqFrame.from_iq(out, rx.sps, rx.meta)


def symbol_instants(n_symbols: int, sps: int) -> np.ndarray:
    """Sample indices where symbol peaks land."""
    return np.arange(n_symbols) * sps + sps // 2


def edge_weights(pulse: PulseShape, n_symbols: int) -> np.ndarray:
    """Matched-filter peak attenuation per symbol from frame truncation.

    A frame holds only n_symbols*sps samples, so pulses near the edges
    lose part of their tails and their matched-filter peaks shrink by
    the clipped fraction of the tap energy.  Returns that fraction per
    symbol (1.0 deep inside the frame).
    """
    sps = pulse.sps
    length = n_symbols * sps
    center = pulse.span * sps
    csum = np.concatenate([[0.0], np.cumsum(pulse.taps**2)])
    peaks = symbol_instants(n_symbols, sps)
    lo = np.clip(center - peaks, 0, len(pulse.taps))
    hi = np.clip(center - peaks + length, 0, len(pulse.taps))
    return csum[hi] - csum[lo]


def pad_frame(frame: IqFrame, length: int) -> IqFrame:
    """Zero-pad a frame up to a task frame length (never truncates)."""
    if len(frame) > length:
        raise ValueError(f"frame of {len(frame)} samples exceeds target {length}")
    pad = length - len(frame)
    if pad == 0:
        return frame
    return IqFrame(
        np.concatenate([frame.i, np.zeros(pad)]),
        np.concatenate([frame.q, np.zeros(pad)]),
        frame.sps,
        frame.meta,
    )
