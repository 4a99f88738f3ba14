"""Learnable state of the video generator plus checkpoint round-tripping."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from ..errors import ShapeError, StageExceeded, StageOrderError
from ..kwx import NormalizedText
from .config import UPDATE_RULE, TrainConfig
from .nets import (
    FrameBlockDiscriminator,
    FrameGenerator,
    TextEncoder,
    grow_first_layer,
    init_parameters,
)


@dataclass(frozen=True)
class TextEmbedding:
    phi: np.ndarray  # (phi_dim,)


@dataclass(frozen=True)
class NoiseSeed:
    z: np.ndarray  # (z_dim,)


@dataclass
class FrameSequence:
    frames: list[np.ndarray]  # each (H, W, C), float32 in [-1, 1]
    fps: int = 8

    def __len__(self) -> int:
        return len(self.frames)


@dataclass
class GenState:
    config: TrainConfig
    encoder: TextEncoder
    generator: FrameGenerator
    d_image: FrameBlockDiscriminator
    d_steps: list[FrameBlockDiscriminator] = field(default_factory=list)
    stage: int = 0
    iteration: int = 0
    rng: torch.Generator = field(default_factory=torch.Generator)

    def step_discriminator(self, m: int) -> FrameBlockDiscriminator:
        if m < 1 or m > len(self.d_steps):
            raise StageOrderError(f"no step discriminator for stage {m}")
        return self.d_steps[m - 1]

    def generator_parameters(self) -> list[torch.nn.Parameter]:
        # The text encoder trains with the generator side; discriminator
        # updates see phi detached.
        return list(self.encoder.parameters()) + list(self.generator.parameters())

    def named_tensors(self) -> dict[str, torch.Tensor]:
        groups: list[tuple[str, torch.nn.Module]] = [
            ("encoder", self.encoder),
            ("generator", self.generator),
            ("d_image", self.d_image),
        ]
        groups += [(f"d_step_{i + 1}", d) for i, d in enumerate(self.d_steps)]
        out: dict[str, torch.Tensor] = {}
        for prefix, module in groups:
            for name, param in module.named_parameters():
                out[f"{prefix}.{name}"] = param
        return out


def new_state(config: TrainConfig, vocab: list[str]) -> GenState:
    """Build a freshly initialized state; all draws come from config.seed."""
    config.validate()
    rng = torch.Generator()
    rng.manual_seed(config.seed)
    encoder = TextEncoder(vocab, config)
    generator = FrameGenerator(config)
    d_image = FrameBlockDiscriminator(config, in_frames=1)
    for module in (encoder, generator, d_image):
        init_parameters(module, rng)
    return GenState(
        config=config,
        encoder=encoder,
        generator=generator,
        d_image=d_image,
        rng=rng,
    )


def encode_text(text: NormalizedText, state: GenState) -> TextEmbedding:
    with torch.no_grad():
        phi = state.encoder(state.encoder.token_ids(text.tokens))
    return TextEmbedding(phi=phi.numpy().copy())


def sample_noise(state: GenState, count: int) -> list[NoiseSeed]:
    z = torch.randn(count, state.config.z_dim, generator=state.rng)
    return [NoiseSeed(z=z[i].numpy().copy()) for i in range(count)]


def generate_frames(
    state: GenState,
    phi: TextEmbedding,
    z0: NoiseSeed,
    zs: list[NoiseSeed],
    m: int,
) -> FrameSequence:
    """Roll the recurrent unit 2^m steps and decode each hidden state."""
    if m > state.stage:
        raise StageExceeded(f"stage {m} requested but model trained to {state.stage}")
    if m < 0:
        raise ShapeError("stage m must be >= 0")
    if len(zs) != 2**m:
        raise ShapeError(f"need {2 ** m} noise seeds for stage {m}, got {len(zs)}")
    phi_t = torch.as_tensor(phi.phi, dtype=torch.float32).unsqueeze(0)
    z0_t = torch.as_tensor(z0.z, dtype=torch.float32).unsqueeze(0)
    zs_t = torch.stack(
        [torch.as_tensor(s.z, dtype=torch.float32) for s in zs]
    ).unsqueeze(0)
    with torch.no_grad():
        frames = state.generator.rollout(phi_t, z0_t, zs_t)[0]  # (T, C, H, W)
    return FrameSequence(
        frames=[f.permute(1, 2, 0).numpy().copy() for f in frames]
    )


def init_step_discriminator(state: GenState, m: int) -> GenState:
    """Enter stage m: clone the previous discriminator with doubled input."""
    if m != state.stage + 1:
        raise StageOrderError(
            f"stages must be entered in order: at {state.stage}, requested {m}"
        )
    prev = state.d_image if m == 1 else state.d_steps[m - 2]
    state.d_steps.append(grow_first_layer(prev, state.config))
    state.stage = m
    return state


# --- checkpointing ----------------------------------------------------------

def save_checkpoint(state: GenState, directory: str | Path) -> Path:
    """Write one .npy per named parameter plus metadata; bitwise stable."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for name, tensor in state.named_tensors().items():
        np.save(directory / f"{name}.npy", tensor.detach().numpy())
    np.save(directory / "rng_state.npy", state.rng.get_state().numpy())
    meta = {
        "stage": state.stage,
        "iteration": state.iteration,
        "seed": state.config.seed,
        "config_hash": state.config.hash(),
        "update_rule": UPDATE_RULE,
        "vocab": state.encoder.vocab,
    }
    (directory / "metadata.json").write_text(
        json.dumps(meta, indent=2, sort_keys=True), encoding="utf-8"
    )
    (directory / "config.json").write_text(state.config.to_json(), encoding="utf-8")
    return directory


def load_checkpoint(directory: str | Path) -> GenState:
    directory = Path(directory)
    config = TrainConfig.load(directory / "config.json")
    meta = json.loads((directory / "metadata.json").read_text(encoding="utf-8"))
    state = new_state(config, vocab=meta["vocab"])
    for _ in range(meta["stage"]):
        init_step_discriminator(state, state.stage + 1)
    for name, tensor in state.named_tensors().items():
        values = np.load(directory / f"{name}.npy")
        with torch.no_grad():
            tensor.copy_(torch.from_numpy(values))
    state.rng.set_state(torch.from_numpy(np.load(directory / "rng_state.npy")))
    state.iteration = meta["iteration"]
    return state


def checkpoint_hash(directory: str | Path) -> str:
    """Digest of every file in the checkpoint, order-independent."""
    directory = Path(directory)
    digest = hashlib.sha256()
    for path in sorted(directory.rglob("*")):
        if path.is_file():
            digest.update(path.relative_to(directory).as_posix().encode())
            digest.update(path.read_bytes())
    return digest.hexdigest()
