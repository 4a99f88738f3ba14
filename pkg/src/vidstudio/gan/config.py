"""Training configuration: dimensions, budgets, rates, seed.

The config round-trips through JSON so a run is fully described by one file;
its hash is stored in checkpoints to tie parameters back to their recipe.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ..errors import ConfigError

# Update rule applied to every parameter tensor; recorded in checkpoint
# metadata so a checkpoint states how it was produced.
UPDATE_RULE = "rmsprop(momentum=0): v <- alpha*v + (1-alpha)*g^2; p <- p - lr*g/(sqrt(v)+eps)"


@dataclass
class TrainConfig:
    # architecture
    frame_size: int = 32          # H = W
    channels: int = 3
    z_dim: int = 32
    phi_dim: int = 64
    token_dim: int = 64
    hidden_dim: int = 128
    gen_channels: tuple[int, ...] = (64, 32, 16, 8)
    disc_channels: tuple[int, ...] = (16, 32, 64, 64)
    cond_dim: int = 32            # projected phi size inside the conditional head

    # schedule
    stage1_iters: int = 2000
    stage_iters: tuple[int, ...] = (400, 300, 200)  # budgets for m = 1..n
    n_stages: int = 3
    batch_size: int = 16

    # optimization
    lr_g: float = 1e-3
    lr_d: float = 1e-3
    rmsprop_alpha: float = 0.99
    rmsprop_eps: float = 1e-8

    # run control
    seed: int = 0
    dataset_path: str = ""
    torch_threads: int = 1        # >1 loses the bitwise-determinism guarantee
    log_every: int = 200

    def validate(self) -> "TrainConfig":
        if self.stage1_iters < 0:
            raise ConfigError("stage1_iters must be >= 0")
        if self.n_stages < 0:
            raise ConfigError("n_stages must be >= 0")
        if len(self.stage_iters) < self.n_stages:
            raise ConfigError(
                f"need {self.n_stages} stage budgets, got {len(self.stage_iters)}"
            )
        if any(b < 0 for b in self.stage_iters):
            raise ConfigError("stage budgets must be >= 0")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.lr_g <= 0 or self.lr_d <= 0:
            raise ConfigError("learning rates must be positive")
        return self

    def to_json(self) -> str:
        payload = asdict(self)
        payload["gen_channels"] = list(self.gen_channels)
        payload["disc_channels"] = list(self.disc_channels)
        payload["stage_iters"] = list(self.stage_iters)
        payload["update_rule"] = UPDATE_RULE
        return json.dumps(payload, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "TrainConfig":
        payload = json.loads(text)
        payload.pop("update_rule", None)
        for key in ("gen_channels", "disc_channels", "stage_iters"):
            if key in payload:
                payload[key] = tuple(payload[key])
        return cls(**payload).validate()

    @classmethod
    def load(cls, path: str | Path) -> "TrainConfig":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    def hash(self) -> str:
        return hashlib.sha256(self.to_json().encode("utf-8")).hexdigest()[:16]
