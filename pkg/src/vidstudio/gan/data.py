"""Clip datasets: per-clip directories of PNG frames plus caption.txt.

Also houses the synthetic shapes corpus used by the desk-scale training
checks: 64 clips covering every (color, shape, motion) combination, each an
object sliding across the frame.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from PIL import Image, ImageDraw

from ..errors import InsufficientData
from ..kwx import normalize_text


@dataclass
class ClipExample:
    name: str
    caption: str
    tokens: tuple[str, ...]
    frames: torch.Tensor  # (T, C, H, W), float32 in [-1, 1]


@dataclass
class ClipDataset:
    clips: list[ClipExample]
    root: str = ""

    def __len__(self) -> int:
        return len(self.clips)

    def vocab(self) -> list[str]:
        seen: dict[str, None] = {}
        for clip in self.clips:
            for tok in clip.tokens:
                seen.setdefault(tok)
        return list(seen)

    def distinct_captions(self) -> int:
        return len({clip.caption for clip in self.clips})


def _frame_to_tensor(img: Image.Image) -> torch.Tensor:
    arr = np.asarray(img.convert("RGB"), dtype=np.float32) / 127.5 - 1.0
    return torch.from_numpy(arr).permute(2, 0, 1)


def load_dataset(root: str | Path) -> ClipDataset:
    root = Path(root)
    clips = []
    for clip_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        caption_file = clip_dir / "caption.txt"
        frame_files = sorted(clip_dir.glob("frame_*.png"))
        if not caption_file.exists() or not frame_files:
            continue
        caption = caption_file.read_text(encoding="utf-8").strip()
        frames = torch.stack(
            [_frame_to_tensor(Image.open(f)) for f in frame_files]
        )
        clips.append(
            ClipExample(
                name=clip_dir.name,
                caption=caption,
                tokens=normalize_text(caption).tokens,
                frames=frames,
            )
        )
    if not clips:
        raise InsufficientData(f"no clips found under {root}")
    return ClipDataset(clips=clips, root=str(root))


# --- synthetic shapes corpus -------------------------------------------------

COLORS = {
    "red": (220, 40, 40),
    "green": (40, 200, 60),
    "blue": (50, 80, 230),
    "yellow": (230, 210, 40),
}
SHAPES = ("circle", "square", "triangle", "cross")
MOTIONS = ("left", "right", "up", "down")


def _draw_shape(draw: ImageDraw.ImageDraw, shape: str, cx: float, cy: float,
                radius: float, color: tuple[int, int, int]) -> None:
    r = radius
    if shape == "circle":
        draw.ellipse([cx - r, cy - r, cx + r, cy + r], fill=color)
    elif shape == "square":
        draw.rectangle([cx - r, cy - r, cx + r, cy + r], fill=color)
    elif shape == "triangle":
        draw.polygon([(cx, cy - r), (cx - r, cy + r), (cx + r, cy + r)], fill=color)
    elif shape == "cross":
        w = max(1, int(r / 2))
        draw.rectangle([cx - r, cy - w, cx + r, cy + w], fill=color)
        draw.rectangle([cx - w, cy - r, cx + w, cy + r], fill=color)
    else:
        raise ValueError(f"unknown shape {shape!r}")


def make_shapes_corpus(
    root: str | Path,
    frame_size: int = 32,
    n_frames: int = 8,
    seed: int = 0,
    jitter: int = 0,
) -> Path:
    """Render the 64-clip corpus to disk; jitter offsets centers for held-out
    variants that keep the caption distribution of the training set."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    size = frame_size
    radius = size * 0.18
    idx = 0
    for color_name, color in COLORS.items():
        for shape in SHAPES:
            for motion in MOTIONS:
                caption = f"{color_name} {shape} moving {motion}"
                clip_dir = root / f"clip_{idx:03d}"
                clip_dir.mkdir(exist_ok=True)
                (clip_dir / "caption.txt").write_text(caption, encoding="utf-8")
                jx = float(rng.integers(-jitter, jitter + 1)) if jitter else 0.0
                jy = float(rng.integers(-jitter, jitter + 1)) if jitter else 0.0
                lo, hi = radius + 1, size - radius - 1
                for t in range(n_frames):
                    frac = t / max(1, n_frames - 1)
                    if motion == "right":
                        cx, cy = lo + frac * (hi - lo), size / 2 + jy
                    elif motion == "left":
                        cx, cy = hi - frac * (hi - lo), size / 2 + jy
                    elif motion == "down":
                        cx, cy = size / 2 + jx, lo + frac * (hi - lo)
                    else:  # up
                        cx, cy = size / 2 + jx, hi - frac * (hi - lo)
                    img = Image.new("RGB", (size, size), (0, 0, 0))
                    _draw_shape(ImageDraw.Draw(img), shape, cx, cy, radius, color)
                    img.save(clip_dir / f"frame_{t:03d}.png")
                idx += 1
    return root
