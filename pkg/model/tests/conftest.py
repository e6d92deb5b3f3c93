import subprocess
import sys

import pytest

GEN = [sys.executable, "-m", "rfsynth.cli", "generate"]


def generate(path, preset, seed, split="train", count=None, extra=()):
    cmd = GEN + ["--preset", preset, "--seed", str(seed), "--out", str(path), "--split", split]
    if count is not None:
        cmd += ["--count", str(count)]
    cmd += list(extra)
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(f"dataset generation failed: {proc.stderr}")
    return path


@pytest.fixture(scope="session")
def data_dir(tmp_path_factory):
    return tmp_path_factory.mktemp("rfds")


@pytest.fixture(scope="session")
def demod_small(data_dir):
    """64-example BPSK demod pair for fast io/predict tests."""
    train = generate(data_dir / "demod-s-train.rfds", "demod-desk", 61, count=64)
    val = generate(data_dir / "demod-s-val.rfds", "demod-desk", 61, split="val", count=32)
    return train, val


@pytest.fixture(scope="session")
def amc_small(data_dir):
    train = generate(data_dir / "amc-s-train.rfds", "amc-desk", 71, count=64)
    val = generate(data_dir / "amc-s-val.rfds", "amc-desk", 71, split="val", count=32)
    return train, val


@pytest.fixture(scope="session")
def regression_small(data_dir):
    train = generate(data_dir / "regr-s-train.rfds", "regression-desk", 81, count=64)
    val = generate(data_dir / "regr-s-val.rfds", "regression-desk", 81, split="val", count=32)
    return train, val


@pytest.fixture(scope="session")
def symbols_small(data_dir):
    train = generate(data_dir / "sym-s-train.rfds", "symbols-desk", 91, count=64)
    val = generate(data_dir / "sym-s-val.rfds", "symbols-desk", 91, split="val", count=32)
    return train, val


@pytest.fixture(scope="session")
def amc_desk(data_dir):
    """Full desk-scale AMC pair (2^10 train / 2^8 val)."""
    train = generate(data_dir / "amc-train.rfds", "amc-desk", 100, extra=("--threads", "2"))
    val = generate(data_dir / "amc-val.rfds", "amc-desk", 100, split="val", extra=("--threads", "2"))
    return train, val


@pytest.fixture(scope="session")
def demod_desk(data_dir):
    """Full desk-scale BPSK demod pair."""
    train = generate(data_dir / "demod-train.rfds", "demod-desk", 200, extra=("--threads", "2"))
    val = generate(data_dir / "demod-val.rfds", "demod-desk", 200, split="val", extra=("--threads", "2"))
    return train, val
