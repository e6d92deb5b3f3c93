"""The 13 modulation alphabets with Gray bit labels.

Identifiers are frozen (they appear in dataset files):

    id  name     id  name      id  name
    0   OOK      5   8PSK      9   32QAM
    1   4ASK     6   16PSK     10  64QAM
    2   8ASK     7   16APSK    11  128QAM
    3   BPSK     8   16QAM     12  256QAM
    4   QPSK

Every alphabet is normalized to unit mean symbol energy.  PSK rings and
square QAM grids carry exact Gray labels (geometric neighbors differ in
one bit); the cross QAMs and 16-APSK, where exact Gray labeling is
impossible, use a reflected-Gray indexing of their canonical point order.
Exact point coordinates are tabulated in docs/constellations.md.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class UnsupportedModulationError(ValueError):
    """Raised for a modulation identifier outside the 13-entry table."""


class RaggedMessageError(ValueError):
    """Raised when a bit string does not divide into whole symbols."""


@dataclass(frozen=True)
class Constellation:
    id: int
    name: str
    points: np.ndarray  # complex128, unit mean energy
    bits_per_symbol: int
    bit_labels: np.ndarray  # bit_labels[k] = Gray pattern of points[k]
    _index_of_label: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        m = 1 << self.bits_per_symbol
        if len(self.points) != m:
            raise ValueError(f"{self.name}: {len(self.points)} points, expected {m}")
        if sorted(self.bit_labels.tolist()) != list(range(m)):
            raise ValueError(f"{self.name}: bit_labels is not a permutation")
        inv = np.empty(m, dtype=np.int64)
        inv[self.bit_labels] = np.arange(m)
        object.__setattr__(self, "_index_of_label", inv)

    @property
    def size(self) -> int:
        return len(self.points)

    def index_of_label(self, label: int) -> int:
        return int(self._index_of_label[label])


@dataclass(frozen=True)
class SymbolSequence:
    indices: np.ndarray  # int64 in [0, 2**bits_per_symbol)
    constellation_id: int

    def __len__(self) -> int:
        return len(self.indices)


def _gray(k: int) -> int:
    return k ^ (k >> 1)


def _normalize(points: np.ndarray) -> np.ndarray:
    return points / np.sqrt(np.mean(np.abs(points) ** 2))


def _ask(order: int) -> tuple[np.ndarray, np.ndarray]:
    # amplitude-ordered levels, reflected-Gray labels along the amplitude axis
    levels = np.array([2 * k - (order - 1) for k in range(order)], dtype=float)
    labels = np.array([_gray(k) for k in range(order)])
    return _normalize(levels.astype(complex)), labels


def _ook() -> tuple[np.ndarray, np.ndarray]:
    return _normalize(np.array([0.0, 2.0], dtype=complex)), np.array([0, 1])


def _bpsk() -> tuple[np.ndarray, np.ndarray]:
    # bit 0 -> +1 by convention (documented; matters for prediction files)
    return np.array([1.0 + 0.0j, -1.0 + 0.0j]), np.array([0, 1])


def _psk(order: int) -> tuple[np.ndarray, np.ndarray]:
    angles = 2.0 * np.pi * np.arange(order) / order
    points = np.cos(angles) + 1j * np.sin(angles)
    labels = np.array([_gray(k) for k in range(order)])
    return points, labels


def _square_qam(order: int) -> tuple[np.ndarray, np.ndarray]:
    # per-rail reflected Gray: high bits index the I level, low bits the Q level
    m = int(np.sqrt(order))
    rail_bits = m.bit_length() - 1
    levels = [2 * k - (m - 1) for k in range(m)]
    points, labels = [], []
    for a in range(m):
        for b in range(m):
            points.append(complex(levels[a], levels[b]))
            labels.append((_gray(a) << rail_bits) | _gray(b))
    return _normalize(np.array(points)), np.array(labels)


def _cross_qam(order: int) -> tuple[np.ndarray, np.ndarray]:
    # 32: 6x6 grid minus the four outermost corners; 128: 12x12 grid minus
    # the four 2x2 corner blocks.  Scanned I-major, labeled by reflected Gray
    # over the scan rank (exact Gray labeling does not exist for crosses).
    m = {32: 6, 128: 12}[order]
    cut = {32: 5, 128: 9}[order]
    levels = [2 * k - (m - 1) for k in range(m)]
    points = [
        complex(re, im)
        for re in levels
        for im in levels
        if not (abs(re) >= cut and abs(im) >= cut)
    ]
    labels = np.array([_gray(k) for k in range(order)])
    return _normalize(np.array(points)), labels


def _apsk16() -> tuple[np.ndarray, np.ndarray]:
    # 4+12 rings, outer/inner radius ratio 2.85; ring-ordered Gray indexing
    gamma = 2.85
    r1 = np.sqrt(16.0 / (4.0 + 12.0 * gamma**2))
    r2 = gamma * r1
    inner = r1 * np.exp(1j * (np.pi / 4 + np.pi / 2 * np.arange(4)))
    outer = r2 * np.exp(1j * (np.pi / 12 + np.pi / 6 * np.arange(12)))
    points = np.concatenate([inner, outer])
    labels = np.array([_gray(k) for k in range(16)])
    return _normalize(points), labels


_BUILDERS = {
    0: ("OOK", _ook),
    1: ("4ASK", lambda: _ask(4)),
    2: ("8ASK", lambda: _ask(8)),
    3: ("BPSK", _bpsk),
    4: ("QPSK", lambda: _square_qam(4)),
    5: ("8PSK", lambda: _psk(8)),
    6: ("16PSK", lambda: _psk(16)),
    7: ("16APSK", _apsk16),
    8: ("16QAM", lambda: _square_qam(16)),
    9: ("32QAM", lambda: _cross_qam(32)),
    10: ("64QAM", lambda: _square_qam(64)),
    11: ("128QAM", lambda: _cross_qam(128)),
    12: ("256QAM", lambda: _square_qam(256)),
}

NUM_MODULATIONS = len(_BUILDERS)
MODULATION_NAMES = {i: name for i, (name, _) in _BUILDERS.items()}
MODULATION_IDS = {name: i for i, name in MODULATION_NAMES.items()}


def _build(mod_id: int) -> Constellation:
    name, builder = _BUILDERS[mod_id]
    points, labels = builder()
    bps = (len(points) - 1).bit_length()
    return Constellation(mod_id, name, points, bps, labels)


_CACHE: dict[int, Constellation] = {}


def build_constellation(kind: int | str) -> Constellation:
    """Return the canonical alphabet for an id (0-12) or name ('QPSK')."""
    if isinstance(kind, str):
        key = MODULATION_IDS.get(kind.upper().replace("-", ""))
    else:
        key = int(kind) if int(kind) in _BUILDERS else None
    if key is None:
        raise UnsupportedModulationError(
            f"unsupported modulation {kind!r}; known: "
            + ", ".join(f"{i}={n}" for i, n in MODULATION_NAMES.items())
        )
    if key not in _CACHE:
        _CACHE[key] = _build(key)
    return _CACHE[key]


def all_constellations() -> list[Constellation]:
    return [build_constellation(i) for i in range(NUM_MODULATIONS)]


def modulate_bits(bits: np.ndarray, c: Constellation) -> SymbolSequence:
    """Map a bit string to symbol indices, bits_per_symbol at a time.

    Within each group the first bit is the most significant bit of the
    Gray label.  The bit count must divide into whole symbols.
    """
    bits = np.asarray(bits, dtype=np.uint8)
    if len(bits) % c.bits_per_symbol:
        raise RaggedMessageError(
            f"ragged message: {len(bits)} bits is not a multiple of "
            f"{c.bits_per_symbol} ({c.name})"
        )
    groups = bits.reshape(-1, c.bits_per_symbol).astype(np.int64)
    weights = 1 << np.arange(c.bits_per_symbol - 1, -1, -1)
    labels = groups @ weights
    return SymbolSequence(c._index_of_label[labels], c.id)


def symbols_to_points(seq: SymbolSequence, c: Constellation) -> np.ndarray:
    return c.points[seq.indices]


def symbols_to_bits(indices: np.ndarray, c: Constellation) -> np.ndarray:
    labels = c.bit_labels[np.asarray(indices, dtype=np.int64)]
    shifts = np.arange(c.bits_per_symbol - 1, -1, -1)
    return ((labels[:, None] >> shifts) & 1).astype(np.uint8).reshape(-1)


def hard_demap(symbols: np.ndarray, c: Constellation) -> tuple[SymbolSequence, np.ndarray]:
    """Nearest-point decision per received value; ties go to the lowest index."""
    symbols = np.asarray(symbols, dtype=complex)
    d2 = np.abs(symbols[:, None] - c.points[None, :]) ** 2
    indices = np.argmin(d2, axis=1)  # argmin returns the first (lowest) index
    return SymbolSequence(indices, c.id), symbols_to_bits(indices, c)


def constellation_table() -> list[dict]:
    """JSON-ready description of all 13 alphabets (used in dataset headers)."""
    table = []
    for c in all_constellations():
        table.append(
            {
                "id": c.id,
                "name": c.name,
                "bits_per_symbol": c.bits_per_symbol,
                "points": [[float(p.real), float(p.imag)] for p in c.points],
                "bit_labels": [int(b) for b in c.bit_labels],
            }
        )
    return table
