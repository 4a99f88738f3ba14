"""Matched / fake / wrong pair construction for adversarial training."""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import Tensor

from ..errors import InsufficientData
from .data import ClipExample


@dataclass
class PairBatch:
    """Three equally sized legs; frames are (B, T, C, H, W) blocks.

    The fake leg shares captions with the real leg; the wrong leg shares the
    real frames but carries a caption drawn from a different batch item.
    """

    real_frames: Tensor
    real_phi: Tensor
    fake_frames: Tensor
    fake_phi: Tensor
    wrong_phi: Tensor

    @property
    def wrong_frames(self) -> Tensor:
        return self.real_frames

    @property
    def batch_size(self) -> int:
        return self.real_frames.shape[0]

    def squeezed(self) -> "PairBatch":
        """Collapse a T=1 axis so legs become single frames (B, C, H, W)."""
        return PairBatch(
            real_frames=self.real_frames.squeeze(1),
            real_phi=self.real_phi,
            fake_frames=self.fake_frames.squeeze(1),
            fake_phi=self.fake_phi,
            wrong_phi=self.wrong_phi,
        )

    def frame_slice(self, indices: Tensor) -> "PairBatch":
        """Pick one frame per item (same index for real and fake legs)."""
        rows = torch.arange(self.batch_size)
        return PairBatch(
            real_frames=self.real_frames[rows, indices],
            real_phi=self.real_phi,
            fake_frames=self.fake_frames[rows, indices],
            fake_phi=self.fake_phi,
            wrong_phi=self.wrong_phi,
        )

    def detached(self) -> "PairBatch":
        return PairBatch(
            real_frames=self.real_frames.detach(),
            real_phi=self.real_phi.detach(),
            fake_frames=self.fake_frames.detach(),
            fake_phi=self.fake_phi.detach(),
            wrong_phi=self.wrong_phi.detach(),
        )


def _wrong_indices(items: list[ClipExample], rng: torch.Generator) -> list[int]:
    choices = []
    for i, item in enumerate(items):
        others = [j for j, other in enumerate(items) if other.caption != item.caption]
        if not others:
            raise InsufficientData(
                f"no mismatched caption available for item {i} ({item.caption!r})"
            )
        pick = int(torch.randint(len(others), (1,), generator=rng).item())
        choices.append(others[pick])
    return choices


def make_pairs(
    items: list[ClipExample],
    state,
    m: int,
    rng: torch.Generator | None = None,
) -> PairBatch:
    """Build the three legs for a batch of clips at stage m.

    Real legs are uniformly chosen 2^m-frame windows; fakes are generated from
    the same captions with fresh noise; wrong captions are drawn uniformly
    from other batch items with a different caption.
    """
    rng = rng if rng is not None else state.rng
    window = 2**m
    reals = []
    for item in items:
        total = item.frames.shape[0]
        if total < window:
            raise InsufficientData(
                f"clip {item.name!r} has {total} frames, stage {m} needs {window}"
            )
        start = int(torch.randint(total - window + 1, (1,), generator=rng).item())
        reals.append(item.frames[start : start + window])
    real_frames = torch.stack(reals)

    phi = state.encoder.encode_batch([item.tokens for item in items])
    wrong = _wrong_indices(items, rng)
    wrong_phi = phi[wrong]

    batch = len(items)
    z0 = torch.randn(batch, state.config.z_dim, generator=rng)
    zs = torch.randn(batch, window, state.config.z_dim, generator=rng)
    fake_frames = state.generator.rollout(phi, z0, zs)

    return PairBatch(
        real_frames=real_frames,
        real_phi=phi,
        fake_frames=fake_frames,
        fake_phi=phi,
        wrong_phi=wrong_phi,
    )
