"""Evolutionary text-to-video GAN: encoding, generation, losses, training."""

from .config import UPDATE_RULE, TrainConfig
from .data import ClipDataset, ClipExample, load_dataset, make_shapes_corpus
from .losses import (
    EPS,
    LossValue,
    generator_view,
    image_level_loss,
    sequence_level_loss,
    total_objective,
)
from .nets import FrameBlockDiscriminator, FrameGenerator, TextEncoder
from .pairs import PairBatch, make_pairs
from .state import (
    FrameSequence,
    GenState,
    NoiseSeed,
    TextEmbedding,
    checkpoint_hash,
    encode_text,
    generate_frames,
    init_step_discriminator,
    load_checkpoint,
    new_state,
    sample_noise,
    save_checkpoint,
)
from .train import (
    matched_mismatch_margin,
    real_fake_margin,
    train_evolutionary,
    train_full,
    train_text_to_image,
)

__all__ = [
    "UPDATE_RULE",
    "TrainConfig",
    "ClipDataset",
    "ClipExample",
    "load_dataset",
    "make_shapes_corpus",
    "EPS",
    "LossValue",
    "generator_view",
    "image_level_loss",
    "sequence_level_loss",
    "total_objective",
    "FrameBlockDiscriminator",
    "FrameGenerator",
    "TextEncoder",
    "PairBatch",
    "make_pairs",
    "FrameSequence",
    "GenState",
    "NoiseSeed",
    "TextEmbedding",
    "checkpoint_hash",
    "encode_text",
    "generate_frames",
    "init_step_discriminator",
    "load_checkpoint",
    "new_state",
    "sample_noise",
    "save_checkpoint",
    "matched_mismatch_margin",
    "real_fake_margin",
    "train_evolutionary",
    "train_full",
    "train_text_to_image",
]
