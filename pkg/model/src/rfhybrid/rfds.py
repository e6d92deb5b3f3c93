"""Standalone RFDS dataset reader.

Implements the published format contract (docs/FORMAT.md in the
synthesizer repo) without importing the synthesizer, so this package
depends on the file bytes only.  Desk-scale files are decoded eagerly
into arrays sized for training.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

MAGIC = b"RFDS"
FORMAT_VERSION = 1

_RECORD_HEAD = struct.Struct("<QBHHfffffBQH")


@dataclass(frozen=True)
class ConstellationInfo:
    id: int
    name: str
    bits_per_symbol: int
    points: np.ndarray  # complex
    bit_labels: np.ndarray
    index_of_label: np.ndarray


@dataclass
class RfdsData:
    header: dict
    task: str
    frame_length: int
    rx: np.ndarray  # (N, 2, L) float32
    tx: np.ndarray  # (N, 2, L) float32
    modulation_id: np.ndarray  # (N,)
    n_symbols: np.ndarray  # (N,)
    sps: np.ndarray  # (N,)
    snr_db: np.ndarray  # (N,)
    phase_offset: np.ndarray  # (N,)
    freq_offset: np.ndarray  # (N,)
    symbols: list[np.ndarray]  # per-example symbol indices
    constellations: dict[int, ConstellationInfo]

    def __len__(self) -> int:
        return len(self.rx)


def _constellation_table(header: dict) -> dict[int, ConstellationInfo]:
    table = {}
    for entry in header["constellations"]:
        points = np.array([complex(re, im) for re, im in entry["points"]])
        labels = np.asarray(entry["bit_labels"], dtype=np.int64)
        inverse = np.empty_like(labels)
        inverse[labels] = np.arange(len(labels))
        table[entry["id"]] = ConstellationInfo(
            entry["id"], entry["name"], entry["bits_per_symbol"], points, labels, inverse
        )
    return table


def _bits_to_symbols(bits: np.ndarray, info: ConstellationInfo) -> np.ndarray:
    groups = bits.reshape(-1, info.bits_per_symbol).astype(np.int64)
    weights = 1 << np.arange(info.bits_per_symbol - 1, -1, -1)
    return info.index_of_label[groups @ weights]


def load(path) -> RfdsData:
    with open(path, "rb") as fh:
        if fh.read(4) != MAGIC:
            raise ValueError(f"{path}: not an RFDS file")
        version = fh.read(4)
        if version[0] != FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported RFDS version {version[0]}")
        (header_len,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(header_len).decode("utf-8"))
        count = int(header["example_count"])
        frame_length = int(header["frame_length"])
        constellations = _constellation_table(header)

        rx = np.empty((count, 2, frame_length), dtype=np.float32)
        tx = np.empty((count, 2, frame_length), dtype=np.float32)
        mods = np.empty(count, dtype=np.int64)
        n_symbols = np.empty(count, dtype=np.int64)
        sps = np.empty(count, dtype=np.int64)
        snr = np.empty(count, dtype=np.float64)
        phase = np.empty(count, dtype=np.float64)
        freq = np.empty(count, dtype=np.float64)
        symbols: list[np.ndarray] = []

        frame_bytes = 8 * frame_length
        for i in range(count):
            head = fh.read(_RECORD_HEAD.size)
            if len(head) < _RECORD_HEAD.size:
                raise ValueError(f"{path}: truncated at record {i}")
            (_, mod_id, n_sym, sps_i, _beta, phase_i, freq_i, snr_i, _eta,
             _fading, _fseed, bit_count) = _RECORD_HEAD.unpack(head)
            n_bit_bytes = (bit_count + 7) // 8
            payload = fh.read(n_bit_bytes + 2 * frame_bytes)
            if len(payload) < n_bit_bytes + 2 * frame_bytes:
                raise ValueError(f"{path}: truncated at record {i}")
            bits = np.unpackbits(
                np.frombuffer(payload, dtype=np.uint8, count=n_bit_bytes)
            )[:bit_count]
            tx_iq = np.frombuffer(payload, dtype="<f4", count=2 * frame_length, offset=n_bit_bytes)
            rx_iq = np.frombuffer(
                payload, dtype="<f4", count=2 * frame_length, offset=n_bit_bytes + frame_bytes
            )
            tx[i, 0], tx[i, 1] = tx_iq[0::2], tx_iq[1::2]
            rx[i, 0], rx[i, 1] = rx_iq[0::2], rx_iq[1::2]
            mods[i], n_symbols[i], sps[i] = mod_id, n_sym, sps_i
            snr[i], phase[i], freq[i] = snr_i, phase_i, freq_i
            symbols.append(_bits_to_symbols(bits, constellations[mod_id]))

    return RfdsData(
        header=header,
        task=header["preset"]["task"],
        frame_length=frame_length,
        rx=rx,
        tx=tx,
        modulation_id=mods,
        n_symbols=n_symbols,
        sps=sps,
        snr_db=snr,
        phase_offset=phase,
        freq_offset=freq,
        symbols=symbols,
        constellations=constellations,
    )


def normalize_rx(rx: np.ndarray) -> np.ndarray:
    """Scale each frame to unit mean sample power (model input convention)."""
    power = np.mean(rx**2, axis=(1, 2), keepdims=True) * 2.0
    return rx / np.sqrt(np.maximum(power, 1e-12))
