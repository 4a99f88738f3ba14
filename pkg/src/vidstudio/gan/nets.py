"""Network components: text encoder, recurrent frame generator, discriminators.

No normalization layers anywhere: the replicate-and-halve discriminator
initialization must be exact, and batch statistics would break both that and
bitwise run-to-run determinism.
"""

from __future__ import annotations

import torch
from torch import Tensor, nn

from ..errors import ShapeError
from .config import TrainConfig

OOV_TOKEN = "<oov>"


def init_parameters(module: nn.Module, gen: torch.Generator) -> None:
    """Reinitialize every parameter from ``gen`` (definition order)."""
    for name, param in module.named_parameters():
        with torch.no_grad():
            if name.endswith("bias"):
                param.zero_()
            else:
                param.normal_(0.0, 0.05, generator=gen)


class TextEncoder(nn.Module):
    """Mean of learned per-token vectors followed by a linear map.

    The vocabulary is frozen at construction; unknown tokens share one
    dedicated out-of-vocabulary vector, which is also the embedding of the
    empty caption.
    """

    def __init__(self, vocab: list[str], cfg: TrainConfig):
        super().__init__()
        self.vocab = list(vocab)
        self.index = {tok: i for i, tok in enumerate(self.vocab)}
        self.oov_index = len(self.vocab)
        self.embed = nn.Embedding(len(self.vocab) + 1, cfg.token_dim)
        self.proj = nn.Linear(cfg.token_dim, cfg.phi_dim)

    def token_ids(self, tokens: tuple[str, ...] | list[str]) -> Tensor:
        if not tokens:
            return torch.tensor([self.oov_index], dtype=torch.long)
        return torch.tensor(
            [self.index.get(tok, self.oov_index) for tok in tokens],
            dtype=torch.long,
        )

    def forward(self, token_ids: Tensor) -> Tensor:
        # token_ids: (L,) -> (phi_dim,)
        vecs = self.embed(token_ids)
        return self.proj(vecs.mean(dim=0))

    def encode_batch(self, token_lists: list[tuple[str, ...]]) -> Tensor:
        return torch.stack([self(self.token_ids(toks)) for toks in token_lists])


class FrameGenerator(nn.Module):
    """GRU rollout over (phi, z_k) inputs; each hidden state decodes to a frame.

    z_0 seeds the initial hidden state through a learned linear map; step k
    consumes concat(phi, z_k). The decoder upsamples 2x per transposed-conv
    block, so the spatial start size is frame_size / 2**len(gen_channels).
    """

    def __init__(self, cfg: TrainConfig):
        super().__init__()
        blocks = len(cfg.gen_channels)
        if cfg.frame_size % (2**blocks) != 0:
            raise ValueError(
                f"frame_size {cfg.frame_size} not divisible by 2^{blocks}"
            )
        self.start_size = cfg.frame_size // (2**blocks)
        self.cfg = cfg
        self.init_hidden = nn.Linear(cfg.z_dim, cfg.hidden_dim)
        self.cell = nn.GRUCell(cfg.phi_dim + cfg.z_dim, cfg.hidden_dim)
        self.fc = nn.Linear(
            cfg.hidden_dim, cfg.gen_channels[0] * self.start_size**2
        )
        layers: list[nn.Module] = []
        chans = list(cfg.gen_channels) + [cfg.channels]
        for i in range(blocks):
            layers.append(
                nn.ConvTranspose2d(chans[i], chans[i + 1], 4, stride=2, padding=1)
            )
            if i < blocks - 1:
                layers.append(nn.LeakyReLU(0.2))
        self.decoder = nn.Sequential(*layers)

    def decode(self, hidden: Tensor) -> Tensor:
        # hidden: (B, hidden_dim) -> frames (B, C, H, W) in [-1, 1]
        x = torch.relu(self.fc(hidden))
        x = x.view(-1, self.cfg.gen_channels[0], self.start_size, self.start_size)
        return torch.tanh(self.decoder(x))

    def rollout(self, phi: Tensor, z0: Tensor, zs: Tensor) -> Tensor:
        """phi (B,d_phi), z0 (B,d_z), zs (B,T,d_z) -> frames (B,T,C,H,W)."""
        hidden = torch.tanh(self.init_hidden(z0))
        frames = []
        for k in range(zs.shape[1]):
            hidden = self.cell(torch.cat([phi, zs[:, k]], dim=1), hidden)
            frames.append(self.decode(hidden))
        return torch.stack(frames, dim=1)


class FrameBlockDiscriminator(nn.Module):
    """Strided-conv discriminator over a channel-concatenated frame block.

    ``in_frames`` frames are stacked along channels (in_frames * C input
    channels). Two heads share the feature trunk: an unconditional head and a
    conditional head that concatenates a projected caption embedding onto the
    last feature map.
    """

    def __init__(self, cfg: TrainConfig, in_frames: int = 1):
        super().__init__()
        self.cfg = cfg
        self.in_frames = in_frames
        blocks = len(cfg.disc_channels)
        self.final_size = cfg.frame_size // (2**blocks)
        if self.final_size < 1:
            raise ValueError("too many discriminator blocks for frame_size")
        layers: list[nn.Module] = []
        chans = [in_frames * cfg.channels] + list(cfg.disc_channels)
        for i in range(blocks):
            layers.append(nn.Conv2d(chans[i], chans[i + 1], 4, stride=2, padding=1))
            layers.append(nn.LeakyReLU(0.2))
        self.features = nn.Sequential(*layers)
        top = cfg.disc_channels[-1]
        self.uncond_head = nn.Conv2d(top, 1, self.final_size)
        self.phi_proj = nn.Linear(cfg.phi_dim, cfg.cond_dim)
        self.cond_merge = nn.Conv2d(top + cfg.cond_dim, top, 1)
        self.cond_head = nn.Conv2d(top, 1, self.final_size)

    def _stack(self, frames: Tensor) -> Tensor:
        # Accept (B, C, H, W) single frames or (B, T, C, H, W) blocks.
        if frames.dim() == 5:
            b, t, c, h, w = frames.shape
            frames = frames.reshape(b, t * c, h, w)
        expected = self.in_frames * self.cfg.channels
        if frames.shape[1] != expected:
            raise ShapeError(
                f"expected {expected} input channels, got {frames.shape[1]}"
            )
        return frames

    def uncond_logit(self, frames: Tensor) -> Tensor:
        feat = self.features(self._stack(frames))
        return self.uncond_head(feat).flatten(1).squeeze(1)

    def cond_logit(self, frames: Tensor, phi: Tensor) -> Tensor:
        feat = self.features(self._stack(frames))
        proj = self.phi_proj(phi)
        tiled = proj[:, :, None, None].expand(-1, -1, feat.shape[2], feat.shape[3])
        merged = torch.nn.functional.leaky_relu(
            self.cond_merge(torch.cat([feat, tiled], dim=1)), 0.2
        )
        return self.cond_head(merged).flatten(1).squeeze(1)


def grow_first_layer(
    prev: FrameBlockDiscriminator, cfg: TrainConfig
) -> FrameBlockDiscriminator:
    """Copy ``prev`` with doubled first-layer input channels.

    First-layer kernels are replicated across the doubled channels and scaled
    by 1/2, so the new discriminator applied to a channel-duplicated input
    reproduces ``prev`` on the single input exactly.
    """
    grown = FrameBlockDiscriminator(cfg, in_frames=prev.in_frames * 2)
    prev_params = dict(prev.named_parameters())
    with torch.no_grad():
        for name, param in grown.named_parameters():
            src = prev_params[name]
            if param.shape == src.shape:
                param.copy_(src)
            else:
                # first conv weight: (out, 2*in, k, k) from (out, in, k, k)
                half = src.shape[1]
                param[:, :half].copy_(src / 2)
                param[:, half:].copy_(src / 2)
    return grown
