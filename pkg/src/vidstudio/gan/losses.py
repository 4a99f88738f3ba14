"""Adversarial objectives over matched, fake and wrong pairs.

Both losses sum five log terms per batch item: unconditional real, conditional
real/matched, unconditional fake, conditional fake/matched, and conditional
real/mismatched. Discriminator outputs pass through a sigmoid and are clamped
to [EPS, 1-EPS] before the logs, so a saturated discriminator yields a large
finite penalty instead of -inf.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import Tensor

from ..errors import NumericalError, ShapeError
from .nets import FrameBlockDiscriminator
from .pairs import PairBatch

EPS = 1e-7


@dataclass(frozen=True)
class LossValue:
    total: float
    image_component: float
    sequence_component: float


def _prob(logit: Tensor) -> Tensor:
    if not torch.isfinite(logit).all():
        raise NumericalError("discriminator emitted non-finite logits")
    return torch.sigmoid(logit).clamp(EPS, 1.0 - EPS)


def _matching_aware_sum(
    d: FrameBlockDiscriminator,
    real: Tensor,
    fake: Tensor,
    phi: Tensor,
    wrong_phi: Tensor,
) -> Tensor:
    p_real = _prob(d.uncond_logit(real))
    p_real_match = _prob(d.cond_logit(real, phi))
    p_fake = _prob(d.uncond_logit(fake))
    p_fake_match = _prob(d.cond_logit(fake, phi))
    p_wrong = _prob(d.cond_logit(real, wrong_phi))
    per_item = (
        torch.log(p_real)
        + torch.log(p_real_match)
        + torch.log(1.0 - p_fake)
        + torch.log(1.0 - p_fake_match)
        + torch.log(1.0 - p_wrong)
    )
    return per_item.sum()


def image_level_loss(d_image: FrameBlockDiscriminator, batch: PairBatch) -> Tensor:
    """Matching-aware image objective; batch legs must be single frames."""
    if batch.real_frames.dim() == 5:
        if batch.real_frames.shape[1] != 1:
            raise ShapeError("image-level loss expects single-frame legs")
        batch = batch.squeezed()
    return _matching_aware_sum(
        d_image, batch.real_frames, batch.fake_frames, batch.real_phi, batch.wrong_phi
    )


def sequence_level_loss(
    d_step: FrameBlockDiscriminator, batch: PairBatch, m: int
) -> Tensor:
    """Sequence analog over channel-concatenated 2^m-frame blocks."""
    if m < 1:
        raise ShapeError("sequence-level loss requires m >= 1")
    if batch.real_frames.dim() != 5 or batch.real_frames.shape[1] != 2**m:
        raise ShapeError(
            f"sequence legs must hold {2 ** m} frames at stage {m}"
        )
    return _matching_aware_sum(
        d_step, batch.real_frames, batch.fake_frames, batch.real_phi, batch.wrong_phi
    )


def generator_view(
    d: FrameBlockDiscriminator, fake: Tensor, phi: Tensor
) -> Tensor:
    """Non-saturating generator objective: minimize -log D on fake legs."""
    p_fake = _prob(d.uncond_logit(fake))
    p_fake_match = _prob(d.cond_logit(fake, phi))
    return -(torch.log(p_fake) + torch.log(p_fake_match)).sum()


def total_objective(image_part: float, sequence_part: float) -> LossValue:
    """Combine the two components; the total is their exact sum."""
    for part in (image_part, sequence_part):
        if not torch.isfinite(torch.tensor(float(part))):
            raise NumericalError("loss components must be finite")
    return LossValue(
        total=float(image_part) + float(sequence_part),
        image_component=float(image_part),
        sequence_component=float(sequence_part),
    )
