"""Two-phase training: single-frame stage, then frame-count-doubling stages.

Determinism contract: every random draw flows through the state's generator,
torch runs with a fixed thread count, and dataset order is the on-disk order,
so identical (seed, config, dataset) produce bitwise-identical parameters.
"""

from __future__ import annotations

import logging

import torch

from ..errors import ConfigError, DivergenceError, NumericalError
from .config import TrainConfig
from .data import ClipDataset, ClipExample
from .losses import generator_view, image_level_loss, sequence_level_loss
from .pairs import PairBatch, make_pairs
from .state import GenState, init_step_discriminator, new_state

logger = logging.getLogger(__name__)


def _optimizer(params, lr: float, config: TrainConfig) -> torch.optim.Optimizer:
    # Momentum-free adaptive updates; the rule string lives in config.UPDATE_RULE.
    return torch.optim.RMSprop(
        params, lr=lr, alpha=config.rmsprop_alpha, eps=config.rmsprop_eps, momentum=0.0
    )


def _sample_items(
    dataset: ClipDataset, batch_size: int, rng: torch.Generator
) -> list[ClipExample]:
    idx = torch.randint(len(dataset), (batch_size,), generator=rng)
    return [dataset.clips[int(i)] for i in idx]


def _check_finite(value: torch.Tensor, where: str) -> None:
    if not torch.isfinite(value).all():
        raise DivergenceError(f"non-finite loss during {where}")


def _d_image_step(
    state: GenState,
    dataset: ClipDataset,
    opt_d: torch.optim.Optimizer,
    opt_g: torch.optim.Optimizer,
    m: int,
    rng: torch.Generator,
) -> float:
    """Maximize the image objective on freshly sampled, detached pairs."""
    items = _sample_items(dataset, state.config.batch_size, rng)
    with torch.no_grad():
        pairs = make_pairs(items, state, m, rng)
    if m > 0:
        idx = torch.randint(2**m, (pairs.batch_size,), generator=rng)
        pairs = pairs.frame_slice(idx)
    else:
        pairs = pairs.squeezed()
    try:
        objective = image_level_loss(state.d_image, pairs)
    except NumericalError as exc:
        raise DivergenceError(f"image discriminator update: {exc}") from exc
    _check_finite(objective, "image discriminator update")
    loss = -objective
    opt_d.zero_grad(set_to_none=True)
    opt_g.zero_grad(set_to_none=True)
    loss.backward()
    opt_d.step()
    return float(objective.detach())


def train_text_to_image(
    config: TrainConfig,
    dataset: ClipDataset,
    state: GenState | None = None,
) -> GenState:
    """Single-frame phase: G and R learn to decode one caption-conditioned
    frame while the image discriminator learns the matching-aware objective."""
    config.validate()
    if config.stage1_iters < 0:
        raise ConfigError("iteration budget must be non-negative")
    torch.set_num_threads(max(1, config.torch_threads))
    if state is None:
        state = new_state(config, vocab=dataset.vocab())
    rng = state.rng
    opt_g = _optimizer(state.generator_parameters(), config.lr_g, config)
    opt_d = _optimizer(state.d_image.parameters(), config.lr_d, config)

    for it in range(config.stage1_iters):
        items = _sample_items(dataset, config.batch_size, rng)
        pairs = make_pairs(items, state, 0, rng).squeezed()
        try:
            g_loss = generator_view(state.d_image, pairs.fake_frames, pairs.fake_phi)
        except NumericalError as exc:
            raise DivergenceError(f"generator update: {exc}") from exc
        _check_finite(g_loss, "generator update")
        opt_g.zero_grad(set_to_none=True)
        opt_d.zero_grad(set_to_none=True)
        g_loss.backward()
        opt_g.step()

        d_obj = _d_image_step(state, dataset, opt_d, opt_g, 0, rng)

        state.iteration += 1
        if config.log_every and (it + 1) % config.log_every == 0:
            logger.info(
                "stage I iter %d/%d g_loss=%.3f d_obj=%.3f",
                it + 1, config.stage1_iters, float(g_loss.detach()), d_obj,
            )
    return state


def train_evolutionary(
    state: GenState,
    config: TrainConfig,
    dataset: ClipDataset,
    n: int,
) -> GenState:
    """Frame-doubling phase: for m = 1..n, grow a step discriminator and train
    G, R against both objectives while D_I and D_S[m] train on fresh pairs."""
    config.validate()
    if n < 0:
        raise ConfigError("n must be >= 0")
    if n > len(config.stage_iters):
        raise ConfigError(f"no budget configured for stage {n}")
    torch.set_num_threads(max(1, config.torch_threads))
    rng = state.rng

    for m in range(1, n + 1):
        init_step_discriminator(state, m)
        d_step = state.step_discriminator(m)
        opt_g = _optimizer(state.generator_parameters(), config.lr_g, config)
        opt_di = _optimizer(state.d_image.parameters(), config.lr_d, config)
        opt_ds = _optimizer(d_step.parameters(), config.lr_d, config)
        budget = config.stage_iters[m - 1]

        for it in range(budget):
            # G, R: minimize both generator views on one generated batch.
            items = _sample_items(dataset, config.batch_size, rng)
            pairs = make_pairs(items, state, m, rng)
            idx = torch.randint(2**m, (pairs.batch_size,), generator=rng)
            frame_pairs = pairs.frame_slice(idx)
            try:
                g_loss = generator_view(
                    state.d_image, frame_pairs.fake_frames, frame_pairs.fake_phi
                ) + generator_view(d_step, pairs.fake_frames, pairs.fake_phi)
            except NumericalError as exc:
                raise DivergenceError(f"generator update (stage {m}): {exc}") from exc
            _check_finite(g_loss, f"generator update (stage {m})")
            opt_g.zero_grad(set_to_none=True)
            opt_di.zero_grad(set_to_none=True)
            opt_ds.zero_grad(set_to_none=True)
            g_loss.backward()
            opt_g.step()

            # D_I: image objective on independently sampled pairs.
            _d_image_step(state, dataset, opt_di, opt_g, m, rng)

            # D_S[m]: sequence objective on a third independent sampling.
            items = _sample_items(dataset, config.batch_size, rng)
            with torch.no_grad():
                seq_pairs = make_pairs(items, state, m, rng)
            try:
                seq_obj = sequence_level_loss(d_step, seq_pairs, m)
            except NumericalError as exc:
                raise DivergenceError(
                    f"step discriminator update (stage {m}): {exc}"
                ) from exc
            _check_finite(seq_obj, f"step discriminator update (stage {m})")
            opt_ds.zero_grad(set_to_none=True)
            opt_g.zero_grad(set_to_none=True)
            (-seq_obj).backward()
            opt_ds.step()

            state.iteration += 1
            if config.log_every and (it + 1) % config.log_every == 0:
                logger.info(
                    "stage %d iter %d/%d g_loss=%.3f seq_obj=%.3f",
                    m, it + 1, budget, float(g_loss.detach()), float(seq_obj.detach()),
                )
    return state


def train_full(config: TrainConfig, dataset: ClipDataset) -> GenState:
    """Stage I followed by evolutionary stages up to config.n_stages."""
    state = train_text_to_image(config, dataset)
    return train_evolutionary(state, config, dataset, config.n_stages)


# --- post-training diagnostics ----------------------------------------------

def matched_mismatch_margin(state: GenState, dataset: ClipDataset) -> float:
    """Mean conditional-head margin sigma(D(x, matched)) - sigma(D(x, wrong))
    over all clips and frames; wrong captions come from several fixed
    rotations of the clip list so adjacent near-duplicates do not dominate."""
    n = len(dataset.clips)
    offsets = sorted({1, max(1, n // 3), max(1, (2 * n) // 3)})
    margins = []
    with torch.no_grad():
        phis = state.encoder.encode_batch([c.tokens for c in dataset.clips])
        for i, clip in enumerate(dataset.clips):
            frames = clip.frames
            phi_m = phis[i].unsqueeze(0).expand(frames.shape[0], -1)
            p_match = torch.sigmoid(state.d_image.cond_logit(frames, phi_m))
            wrongs = []
            for off in offsets:
                j = (i + off) % n
                if dataset.clips[j].caption == clip.caption:
                    continue
                phi_w = phis[j].unsqueeze(0).expand(frames.shape[0], -1)
                wrongs.append(
                    torch.sigmoid(state.d_image.cond_logit(frames, phi_w)).mean()
                )
            if wrongs:
                margins.append(float(p_match.mean() - torch.stack(wrongs).mean()))
    return float(torch.tensor(margins).mean())


def real_fake_margin(
    state: GenState, dataset: ClipDataset, rng: torch.Generator | None = None
) -> float:
    """Mean sigma(D(real frame)) - sigma(D(generated frame)) over the dataset."""
    rng = rng if rng is not None else state.rng
    with torch.no_grad():
        pairs = make_pairs(dataset.clips, state, 0, rng).squeezed()
        p_real = torch.sigmoid(state.d_image.uncond_logit(pairs.real_frames))
        p_fake = torch.sigmoid(state.d_image.uncond_logit(pairs.fake_frames))
    return float(p_real.mean() - p_fake.mean())
