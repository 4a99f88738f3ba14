"""Shared fixtures: tiny assets, a seeded catalog, and the one slow
desk-scale training run reused by every test that needs a trained model."""

from __future__ import annotations

import io
import time

import numpy as np
import pytest
from PIL import Image

from vidstudio.catalog import Catalog
from vidstudio.gan import (
    TrainConfig,
    load_dataset,
    make_shapes_corpus,
    train_full,
)
from vidstudio.media import pcm_to_wav


def make_png(color=(200, 30, 30), size=(32, 32)) -> bytes:
    buf = io.BytesIO()
    Image.new("RGB", size, color).save(buf, format="PNG")
    return buf.getvalue()


def make_gradient_png(seed: int, size=(64, 48)) -> bytes:
    rng = np.random.default_rng(seed)
    arr = rng.integers(0, 256, size=(size[1], size[0], 3), dtype=np.uint8)
    buf = io.BytesIO()
    Image.fromarray(arr).save(buf, format="PNG")
    return buf.getvalue()


def make_beep(seconds: float, freq: float = 440.0) -> bytes:
    n = int(round(seconds * 16000))
    t = np.arange(n) / 16000
    samples = (np.sin(2 * np.pi * freq * t) * 9000).astype(np.int16)
    return pcm_to_wav(samples.tobytes())


@pytest.fixture
def catalog(tmp_path) -> Catalog:
    return Catalog(tmp_path / "catalog")


@pytest.fixture
def seeded_catalog(tmp_path) -> Catalog:
    cat = Catalog(tmp_path / "seeded-catalog")
    cat.put_image("water", make_png((200, 30, 30)))
    cat.put_image("water", make_png((30, 200, 30)))
    cat.put_image("cycle", make_png((30, 30, 200)))
    cat.put_audio("water", make_beep(2.0))
    cat.put_audio("cycle", make_beep(1.5, freq=660))
    return cat


# --- the one slow training run ------------------------------------------


def trend_train_config(dataset_path: str = "") -> TrainConfig:
    return TrainConfig(
        stage1_iters=2000,
        stage_iters=(400, 300, 200),
        n_stages=3,
        batch_size=16,
        seed=3,
        dataset_path=dataset_path,
        log_every=0,
    )


@pytest.fixture(scope="session")
def shapes_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("shapes") / "corpus"
    make_shapes_corpus(root)
    return root


@pytest.fixture(scope="session")
def shapes_dataset(shapes_corpus):
    return load_dataset(shapes_corpus)


@pytest.fixture(scope="session")
def heldout_dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("shapes-held") / "corpus"
    make_shapes_corpus(root, seed=11, jitter=2)
    return load_dataset(root)


@pytest.fixture(scope="session")
def trained_run(shapes_corpus, shapes_dataset):
    """Full Stage I + evolutionary training; also reports wall time."""
    config = trend_train_config(str(shapes_corpus))
    start = time.monotonic()
    state = train_full(config, shapes_dataset)
    elapsed = time.monotonic() - start
    return {"state": state, "config": config, "elapsed": elapsed}
