"""Fréchet distance between Gaussian fits of frame-feature distributions.

The extractor is pluggable. The default is a seeded random linear projection
of flattened pixels: deterministic, weight-free, and sufficient for trend
comparisons at desk scale. An identity (flatten) extractor backs the analytic
tests. The matrix square root goes through an eigendecomposition of the
symmetrized product, never through an iterative solver.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    InsufficientSamples,
    NumericalError,
    ShapeError,
)
from .gan.state import FrameSequence

EIG_CLAMP = 1e-10


@dataclass(frozen=True)
class FeatureMatrix:
    rows: np.ndarray  # (N, d)
    extractor_id: str


@dataclass(frozen=True)
class FIDStats:
    mu: np.ndarray     # (d,)
    sigma: np.ndarray  # (d, d), symmetric
    n: int


@dataclass
class FIDReport:
    rows: list[tuple[str, float]] = field(default_factory=list)
    n_per_set: int = 0
    extractor_id: str = ""
    covariance: str = "unbiased (N-1)"

    def add(self, label: str, value: float) -> None:
        self.rows.append((label, float(value)))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["condition", "fid", "n_per_set", "extractor", "covariance"])
        for label, value in self.rows:
            writer.writerow([label, f"{value:.6f}", self.n_per_set,
                             self.extractor_id, self.covariance])
        return buf.getvalue()

    def to_table(self) -> str:
        # FID is an absolute distance; it is never rendered as a percentage.
        width = max([len(label) for label, _ in self.rows] + [9])
        lines = [f"{'condition'.ljust(width)}  FID"]
        lines += [f"{label.ljust(width)}  {value:.4f}" for label, value in self.rows]
        lines.append(f"(n={self.n_per_set} per set, extractor={self.extractor_id})")
        return "\n".join(lines)


class IdentityExtractor:
    """Flatten pixels; feature dim = H*W*C of the first frame seen."""

    extractor_id = "identity"

    def __call__(self, frames: np.ndarray) -> np.ndarray:
        return frames.reshape(frames.shape[0], -1).astype(np.float64)


class RandomProjectionExtractor:
    """Fixed seeded linear projection of flattened pixels to out_dim."""

    def __init__(self, in_dim: int, out_dim: int = 16, seed: int = 1234):
        rng = np.random.default_rng(seed)
        self.weights = rng.standard_normal((in_dim, out_dim)) / np.sqrt(in_dim)
        self.out_dim = out_dim
        self.extractor_id = f"randproj-d{out_dim}-seed{seed}"

    def __call__(self, frames: np.ndarray) -> np.ndarray:
        flat = frames.reshape(frames.shape[0], -1).astype(np.float64)
        if flat.shape[1] != self.weights.shape[0]:
            raise ShapeError(
                f"extractor built for {self.weights.shape[0]} pixels, "
                f"got {flat.shape[1]}"
            )
        return flat @ self.weights


def default_extractor(frame_size: int = 32, channels: int = 3,
                      out_dim: int = 16, seed: int = 1234) -> RandomProjectionExtractor:
    return RandomProjectionExtractor(frame_size * frame_size * channels, out_dim, seed)


def extract_features(sequences: list[FrameSequence], extractor) -> FeatureMatrix:
    """One feature row per frame, across all sequences in order."""
    frames = [f for seq in sequences for f in seq.frames]
    if not frames:
        raise ShapeError("no frames to extract features from")
    shape = frames[0].shape
    if any(f.shape != shape for f in frames):
        raise ShapeError("inconsistent frame shapes across sequences")
    stacked = np.stack(frames)
    rows = np.asarray(extractor(stacked), dtype=np.float64)
    return FeatureMatrix(rows=rows, extractor_id=getattr(extractor, "extractor_id", "custom"))


def fit_gaussian(features: FeatureMatrix) -> FIDStats:
    """Column means and unbiased sample covariance, symmetrized."""
    rows = features.rows
    n = rows.shape[0]
    if n < 2:
        raise InsufficientSamples(f"need >= 2 samples to fit covariance, got {n}")
    mu = rows.mean(axis=0)
    centered = rows - mu
    sigma = centered.T @ centered / (n - 1)
    sigma = (sigma + sigma.T) / 2
    return FIDStats(mu=mu, sigma=sigma, n=n)


def _psd_sqrt(matrix: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(matrix)
    vals = np.where(vals < EIG_CLAMP, 0.0, vals)
    return (vecs * np.sqrt(vals)) @ vecs.T


def frechet_distance(r: FIDStats, g: FIDStats) -> float:
    """||mu_r - mu_g||^2 + Tr(S_r + S_g - 2 (S_r S_g)^(1/2)).

    Tr((S_r S_g)^(1/2)) is computed from the eigenvalues of the symmetrized
    product S_r^(1/2) S_g S_r^(1/2), which shares its spectrum with S_r S_g;
    eigenvalues below EIG_CLAMP are clamped to zero.
    """
    if r.mu.shape != g.mu.shape or r.sigma.shape != g.sigma.shape:
        raise DimensionMismatch(
            f"stats dims differ: {r.mu.shape} vs {g.mu.shape}"
        )
    for stats in (r, g):
        if not (np.isfinite(stats.mu).all() and np.isfinite(stats.sigma).all()):
            raise NumericalError("non-finite values in FID statistics")
    diff = r.mu - g.mu
    root_r = _psd_sqrt(r.sigma)
    inner = root_r @ g.sigma @ root_r
    inner = (inner + inner.T) / 2
    vals = np.linalg.eigvalsh(inner)
    vals = np.where(vals < EIG_CLAMP, 0.0, vals)
    trace_sqrt = float(np.sqrt(vals).sum())
    value = float(diff @ diff + np.trace(r.sigma) + np.trace(g.sigma) - 2 * trace_sqrt)
    # Exactly-identical inputs can land a hair below zero in floating point.
    return max(value, 0.0)


def evaluate(
    state,
    dataset,
    frames_per_method: int = 6,
    extractor=None,
    label: str = "with the text",
    rng=None,
) -> FIDReport:
    """Compare generated frames against real frames drawn from the dataset.

    The historical default of six frames per set is honored but produces a
    rank-deficient covariance; pass frames_per_method >= 64 for stable trends.
    """
    import torch

    from .gan.state import NoiseSeed, TextEmbedding, generate_frames

    if frames_per_method < 2:
        raise InsufficientSamples("frames_per_method must be >= 2")
    if len(dataset.clips) == 0:
        raise InsufficientSamples("dataset is empty")
    cfg = state.config
    if extractor is None:
        extractor = default_extractor(cfg.frame_size, cfg.channels)
    rng = rng if rng is not None else state.rng

    per_clip = 2**state.stage
    generated: list[FrameSequence] = []
    clip_idx = 0
    while sum(len(s.frames) for s in generated) < frames_per_method:
        clip = dataset.clips[clip_idx % len(dataset.clips)]
        with torch.no_grad():
            phi = state.encoder(state.encoder.token_ids(clip.tokens))
        z0 = torch.randn(cfg.z_dim, generator=rng)
        zs = [torch.randn(cfg.z_dim, generator=rng) for _ in range(per_clip)]
        seq = generate_frames(
            state,
            TextEmbedding(phi=phi.numpy()),
            NoiseSeed(z=z0.numpy()),
            [NoiseSeed(z=z.numpy()) for z in zs],
            state.stage,
        )
        generated.append(seq)
        clip_idx += 1
    gen_frames = [f for s in generated for f in s.frames][:frames_per_method]

    real_pool = [
        clip.frames[t].permute(1, 2, 0).numpy()
        for clip in dataset.clips
        for t in range(clip.frames.shape[0])
    ]
    picks = torch.randperm(len(real_pool), generator=rng)[:frames_per_method]
    if len(real_pool) < frames_per_method:
        picks = torch.randint(len(real_pool), (frames_per_method,), generator=rng)
    real_frames = [real_pool[int(i)] for i in picks]

    feats_g = extract_features([FrameSequence(frames=gen_frames)], extractor)
    feats_r = extract_features([FrameSequence(frames=real_frames)], extractor)
    value = frechet_distance(fit_gaussian(feats_r), fit_gaussian(feats_g))

    report = FIDReport(n_per_set=frames_per_method, extractor_id=feats_g.extractor_id)
    report.add(label, value)
    return report
