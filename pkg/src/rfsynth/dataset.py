"""Labeled example generation and the RFDS dataset file format.

Every example is a pure function of (preset, index, base_seed): the
per-example SplitMix64 stream makes draws in a fixed order (symbol
sizing, modulation, bits, excess bandwidth, channel parameters, noise),
so generation parallelizes over indices and serializes byte-identically
regardless of thread count.  docs/FORMAT.md is the normative format and
draw-order description.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, replace

import numpy as np

from . import constellations as cmod
from .channel import (
    DEFAULT_SCATTERERS,
    ChannelParams,
    ChannelProfile,
    PROFILES,
    sample_channel,
    transmit,
)
from .constellations import SymbolSequence, build_constellation, modulate_bits
from .rng import Stream, example_seed
from .waveform import DEFAULT_SPAN, IqFrame, pad_frame, rrc_taps, shape

MAGIC = b"RFDS"
FORMAT_VERSION = 1

_RECORD_HEAD = struct.Struct("<QBHHfffffBQH")

TASKS = ("amc", "regression", "symbol_count", "demod")


class DatasetFormatError(ValueError):
    """Raised for files that are not valid RFDS datasets."""


class DatasetTruncatedError(DatasetFormatError):
    """Raised when a record is cut short."""


@dataclass(frozen=True)
class TaskPreset:
    task: str
    frame_length: int
    modulations: tuple[int, ...]
    profile: ChannelProfile
    train_count: int
    val_count: int
    sps_range: tuple[int, int] | None = None
    n_symbols_range: tuple[int, int] | None = None
    beta_range: tuple[float, float] = (0.2, 0.5)
    rrc_span: int = DEFAULT_SPAN

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"unknown task {self.task!r}; expected one of {TASKS}")
        if self.frame_length % 4:
            raise ValueError("frame_length must be divisible by 4")
        if (self.sps_range is None) == (self.n_symbols_range is None):
            raise ValueError("exactly one of sps_range / n_symbols_range must be set")
        if not self.modulations:
            raise ValueError("at least one modulation id required")
        for m in self.modulations:
            build_constellation(m)  # validates the id

    def to_json(self) -> dict:
        return {
            "task": self.task,
            "frame_length": self.frame_length,
            "modulations": list(self.modulations),
            "profile": self.profile.to_json(),
            "train_count": self.train_count,
            "val_count": self.val_count,
            "sps_range": list(self.sps_range) if self.sps_range else None,
            "n_symbols_range": list(self.n_symbols_range) if self.n_symbols_range else None,
            "beta_range": list(self.beta_range),
            "rrc_span": self.rrc_span,
        }

    @classmethod
    def from_json(cls, d: dict) -> "TaskPreset":
        return cls(
            task=d["task"],
            frame_length=int(d["frame_length"]),
            modulations=tuple(int(m) for m in d["modulations"]),
            profile=ChannelProfile.from_json(d["profile"]),
            train_count=int(d["train_count"]),
            val_count=int(d["val_count"]),
            sps_range=tuple(d["sps_range"]) if d.get("sps_range") else None,
            n_symbols_range=tuple(d["n_symbols_range"]) if d.get("n_symbols_range") else None,
            beta_range=tuple(d.get("beta_range", (0.2, 0.5))),
            rrc_span=int(d.get("rrc_span", DEFAULT_SPAN)),
        )


@dataclass
class Example:
    tx: IqFrame
    rx: IqFrame
    bits: np.ndarray
    symbols: SymbolSequence
    modulation_id: int
    channel: ChannelParams
    sps: int
    n_symbols: int
    beta: float
    example_seed: int


_ALL_MODS = tuple(range(cmod.NUM_MODULATIONS))


def _desk(preset: TaskPreset) -> TaskPreset:
    return replace(preset, train_count=2**10, val_count=2**8)


_AMC_PAPER = TaskPreset(
    task="amc",
    frame_length=512,
    modulations=_ALL_MODS,
    profile=PROFILES["harsh"],
    train_count=13 * 2**14,
    val_count=13 * 2**11,
    sps_range=(16, 32),
)
_REGR_PAPER = TaskPreset(
    task="regression",
    frame_length=512,
    modulations=(cmod.MODULATION_IDS["QPSK"],),
    profile=PROFILES["medium"],
    train_count=2**17,
    val_count=2**13,
    sps_range=(8, 16),
)
_SYM_PAPER = TaskPreset(
    task="symbol_count",
    frame_length=512,
    modulations=_ALL_MODS,
    profile=PROFILES["harsh"],
    train_count=13 * 2**14,
    val_count=13 * 2**11,
    n_symbols_range=(16, 32),
)


def _demod_paper(mod: str) -> TaskPreset:
    return TaskPreset(
        task="demod",
        frame_length=1024,
        modulations=(cmod.MODULATION_IDS[mod],),
        profile=PROFILES["mild"],
        train_count=2**16,
        val_count=2**13,
        sps_range=(4, 4),
    )


PRESETS: dict[str, TaskPreset] = {
    "amc-paper": _AMC_PAPER,
    "amc-desk": _desk(_AMC_PAPER),
    "regression-paper": _REGR_PAPER,
    "regression-desk": _desk(_REGR_PAPER),
    "symbols-paper": _SYM_PAPER,
    "symbols-desk": _desk(_SYM_PAPER),
    "demod-paper": _demod_paper("BPSK"),
    "demod-desk": _desk(_demod_paper("BPSK")),
    "demod-desk-qpsk": _desk(_demod_paper("QPSK")),
    "demod-desk-16qam": _desk(_demod_paper("16QAM")),
}


def generate_example(preset: TaskPreset, index: int, base_seed: int) -> Example:
    """Generate one labeled example deterministically.

    Per-example draw order: sps or symbol count, modulation, bits, beta,
    channel parameters, then channel noise.  The per-example seed is
    example_seed(base_seed, index), so indices can be generated in any
    order or in parallel.
    """
    seed = example_seed(base_seed, index)
    stream = Stream(seed)

    length = preset.frame_length
    if preset.sps_range is not None:
        sps = int(stream.randint(*preset.sps_range))
        n_symbols = length // sps
    else:
        n_symbols = int(stream.randint(*preset.n_symbols_range))
        sps = length // n_symbols

    mod_id = preset.modulations[int(stream.randint(0, len(preset.modulations) - 1))]
    c = build_constellation(mod_id)
    bits = stream.bits(n_symbols * c.bits_per_symbol)
    beta = stream.uniform(*preset.beta_range)

    symbols = modulate_bits(bits, c)
    pulse = rrc_taps(beta, sps, preset.rrc_span)
    tx = pad_frame(shape(symbols, c, pulse), length)

    params = sample_channel(preset.profile, stream)
    rx = transmit(tx, params, stream)

    return Example(
        tx=tx,
        rx=rx,
        bits=bits,
        symbols=symbols,
        modulation_id=mod_id,
        channel=params,
        sps=sps,
        n_symbols=n_symbols,
        beta=beta,
        example_seed=seed,
    )


def _frame_bytes(frame: IqFrame) -> bytes:
    inter = np.empty(2 * len(frame), dtype="<f4")
    inter[0::2] = frame.i
    inter[1::2] = frame.q
    return inter.tobytes()


def _frame_from_bytes(buf: bytes, sps: int) -> IqFrame:
    inter = np.frombuffer(buf, dtype="<f4").astype(np.float64)
    return IqFrame(inter[0::2].copy(), inter[1::2].copy(), sps)


def record_bytes(ex: Example) -> bytes:
    """Serialize one example to its fixed little-endian record layout."""
    packed_bits = np.packbits(ex.bits).tobytes()
    head = _RECORD_HEAD.pack(
        ex.example_seed,
        ex.modulation_id,
        ex.n_symbols,
        ex.sps,
        ex.beta,
        ex.channel.phase_offset,
        ex.channel.freq_offset,
        ex.channel.snr_db,
        ex.channel.fading_eta,
        1 if ex.channel.fading_enabled else 0,
        ex.channel.fading_seed,
        len(ex.bits),
    )
    return head + packed_bits + _frame_bytes(ex.tx) + _frame_bytes(ex.rx)


def _record_from_bytes(buf: bytes, preset: TaskPreset) -> Example:
    head = _RECORD_HEAD.unpack_from(buf)
    (seed, mod_id, n_symbols, sps, beta, phase, freq, snr, eta, fading, fseed, bit_count) = head
    off = _RECORD_HEAD.size
    n_bit_bytes = (bit_count + 7) // 8
    bits = np.unpackbits(np.frombuffer(buf, dtype=np.uint8, count=n_bit_bytes, offset=off))[:bit_count]
    off += n_bit_bytes
    frame_bytes = 8 * preset.frame_length
    tx = _frame_from_bytes(buf[off : off + frame_bytes], sps)
    off += frame_bytes
    rx = _frame_from_bytes(buf[off : off + frame_bytes], sps)

    c = build_constellation(mod_id)
    params = ChannelParams(
        phase_offset=phase,
        freq_offset=freq,
        snr_db=snr,
        fading_eta=eta,
        fading_enabled=bool(fading),
        fading_seed=fseed,
        fading_phase_corrected=preset.profile.fading_phase_corrected,
    )
    return Example(
        tx=tx,
        rx=rx,
        bits=bits,
        symbols=modulate_bits(bits, c),
        modulation_id=mod_id,
        channel=params,
        sps=sps,
        n_symbols=n_symbols,
        beta=float(beta),
        example_seed=seed,
    )


def _record_size(bit_count: int, frame_length: int) -> int:
    return _RECORD_HEAD.size + (bit_count + 7) // 8 + 16 * frame_length


def write_dataset(examples, path, preset: TaskPreset, base_seed: int, example_count: int) -> None:
    """Stream examples (index order) to an RFDS file.

    Works from any iterable, holding one record in memory at a time.
    `example_count` must match what the iterable yields.
    """
    header = {
        "format_version": FORMAT_VERSION,
        "base_seed": int(base_seed),
        "preset": preset.to_json(),
        "constellations": cmod.constellation_table(),
        "example_count": int(example_count),
        "frame_length": preset.frame_length,
        "n_scatterers": DEFAULT_SCATTERERS,
        # stored tx is the shaped signal at unit mean power over its
        # occupied n_symbols*sps samples, zero-padded to frame_length
        "tx_convention": "unit-power-shaped,zero-padded",
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    written = 0
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(bytes([FORMAT_VERSION, 0, 0, 0]))
        fh.write(struct.pack("<I", len(header_bytes)))
        fh.write(header_bytes)
        for ex in examples:
            if isinstance(ex, bytes):
                fh.write(ex)
            else:
                fh.write(record_bytes(ex))
            written += 1
    if written != example_count:
        raise ValueError(f"wrote {written} records but header promised {example_count}")


class DatasetReader:
    """Lazy RFDS reader with random access.

    Iteration decodes one record at a time; `get(i)` builds a record
    offset index on first use (O(1) afterwards).
    """

    def __init__(self, path):
        self.path = path
        self._fh = open(path, "rb")
        magic = self._fh.read(4)
        if magic != MAGIC:
            self._fh.close()
            raise DatasetFormatError(f"{path}: not a dataset file (bad magic {magic!r})")
        version = self._fh.read(4)
        if len(version) < 4 or version[0] != FORMAT_VERSION:
            self._fh.close()
            raise DatasetFormatError(
                f"{path}: unsupported format version {version[:1]!r}, expected {FORMAT_VERSION}"
            )
        (header_len,) = struct.unpack("<I", self._fh.read(4))
        try:
            self.header = json.loads(self._fh.read(header_len).decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as err:
            self._fh.close()
            raise DatasetFormatError(f"{path}: corrupt header ({err})") from err
        self.preset = TaskPreset.from_json(self.header["preset"])
        self.example_count = int(self.header["example_count"])
        self.frame_length = int(self.header["frame_length"])
        self._data_start = 12 + header_len
        self._offsets: list[int] | None = None

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def __len__(self) -> int:
        return self.example_count

    def _read_record_at(self, offset: int, index: int) -> tuple[Example, int]:
        self._fh.seek(offset)
        head = self._fh.read(_RECORD_HEAD.size)
        if len(head) < _RECORD_HEAD.size:
            raise DatasetTruncatedError(f"{self.path}: truncated at record {index}")
        bit_count = _RECORD_HEAD.unpack(head)[-1]
        size = _record_size(bit_count, self.frame_length)
        rest = self._fh.read(size - _RECORD_HEAD.size)
        if len(rest) < size - _RECORD_HEAD.size:
            raise DatasetTruncatedError(f"{self.path}: truncated at record {index}")
        return _record_from_bytes(head + rest, self.preset), offset + size

    def __iter__(self):
        offset = self._data_start
        for index in range(self.example_count):
            ex, offset = self._read_record_at(offset, index)
            yield ex

    def _build_index(self):
        offsets = []
        offset = self._data_start
        for index in range(self.example_count):
            offsets.append(offset)
            self._fh.seek(offset)
            head = self._fh.read(_RECORD_HEAD.size)
            if len(head) < _RECORD_HEAD.size:
                raise DatasetTruncatedError(f"{self.path}: truncated at record {index}")
            bit_count = _RECORD_HEAD.unpack(head)[-1]
            offset += _record_size(bit_count, self.frame_length)
        self._offsets = offsets

    def get(self, index: int) -> Example:
        if not 0 <= index < self.example_count:
            raise IndexError(f"record {index} out of range (0..{self.example_count - 1})")
        if self._offsets is None:
            self._build_index()
        return self._read_record_at(self._offsets[index], index)[0]


def read_dataset(path) -> DatasetReader:
    return DatasetReader(path)


def generate_records(preset: TaskPreset, count: int, base_seed: int, workers: int = 1):
    """Yield serialized records for indices 0..count-1, optionally in parallel.

    Workers compute whole records; results stream out strictly in index
    order, so the output bytes never depend on the worker count.
    """
    if workers <= 1:
        for index in range(count):
            yield record_bytes(generate_example(preset, index, base_seed))
        return
    from concurrent.futures import ProcessPoolExecutor
    from functools import partial

    with ProcessPoolExecutor(max_workers=workers) as pool:
        chunk = max(1, count // (workers * 8))
        job = partial(_record_for_index, preset, base_seed)
        yield from pool.map(job, range(count), chunksize=chunk)


def _record_for_index(preset: TaskPreset, base_seed: int, index: int) -> bytes:
    return record_bytes(generate_example(preset, index, base_seed))
