from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from e2ecd.net import ArchConfig, init_weights
from e2ecd.synth import make_fixture_corpus

GOLDEN_DIR = Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def fixture_corpus(tmp_path_factory) -> Path:
    """Registered 3-pair input corpus, generated once per session."""
    d = tmp_path_factory.mktemp("input_corpus")
    make_fixture_corpus(d, n_pairs=3, size=64, seed=7)
    return d


@pytest.fixture(scope="session")
def arch() -> ArchConfig:
    return ArchConfig()


@pytest.fixture(scope="session")
def weights(arch):
    return init_weights(0, arch)


@pytest.fixture(scope="session")
def golden_dir() -> Path:
    GOLDEN_DIR.mkdir(exist_ok=True)
    return GOLDEN_DIR


def compare_or_record(golden_dir: Path, name: str, arrays: dict[str, np.ndarray], atol=1e-6):
    """Self-generated golden data: record on first run, compare afterwards."""
    path = golden_dir / f"{name}.npz"
    if not path.exists():
        np.savez_compressed(path, **arrays)
        return "recorded"
    stored = np.load(path)
    assert set(stored.files) == set(arrays), f"golden {name} key mismatch"
    for key in arrays:
        np.testing.assert_allclose(
            arrays[key], stored[key], atol=atol, rtol=0,
            err_msg=f"golden {name}/{key} drifted",
        )
    return "compared"
