"""Manifest-driven composition: images to silent video, audio assembly, mux.

Rounding rule used everywhere: frames-per-segment is round-half-away-from-zero
of duration*fps, and segment frame budgets are split across images by
cumulative rounding so they sum exactly.
"""

from __future__ import annotations

import io
import json
import math
import shutil
import subprocess
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from ..catalog import SAMPLE_RATE, AudioAsset, Catalog
from ..errors import (
    DecodeError,
    DurationMismatch,
    EmptySelection,
    MuxerUnavailable,
    NotFound,
    UnknownAsset,
)
from ..kwx import TermList
from .avi import read_avi, write_avi

DEFAULT_FPS = 8
DEFAULT_SEGMENT_SECONDS = 2.0
DEFAULT_FRAME_SIZE = (320, 240)
MUX_TOLERANCE_SECONDS = 0.050
JPEG_QUALITY = 90


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass
class Segment:
    term: str
    image_ids: list[str]
    duration: float


@dataclass
class MediaManifest:
    segments: list[Segment]
    fps: int = DEFAULT_FPS
    audio: list[str | None] = field(default_factory=list)  # aligned with segments

    @property
    def total_duration(self) -> float:
        return sum(seg.duration for seg in self.segments)

    def frame_count(self) -> int:
        return sum(round_half_up(seg.duration * self.fps) for seg in self.segments)

    def to_json(self) -> str:
        return json.dumps(
            {
                "segments": [asdict(seg) for seg in self.segments],
                "fps": self.fps,
                "audio": self.audio,
            },
            indent=2,
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "MediaManifest":
        payload = json.loads(text)
        return cls(
            segments=[Segment(**seg) for seg in payload["segments"]],
            fps=payload["fps"],
            audio=payload["audio"],
        )


@dataclass
class SilentVideo:
    container: bytes
    frame_count: int
    fps: int
    width: int
    height: int

    @property
    def duration(self) -> float:
        return self.frame_count / self.fps


@dataclass
class FinalVideo:
    container: bytes
    suffix: str  # ".avi" or ".mp4"
    duration: float


def build_manifest(
    terms: TermList,
    selections: dict[str, list[str]],
    catalog: Catalog,
    fps: int = DEFAULT_FPS,
    default_duration: float = DEFAULT_SEGMENT_SECONDS,
    order: list[str] | None = None,
) -> MediaManifest:
    """Segments follow term rank order unless an explicit order is given;
    each segment lasts as long as its term's audio clip, or the default."""
    known_terms = terms.words()
    for term in selections:
        if term not in known_terms:
            raise UnknownAsset(f"selection references unknown term {term!r}")
    ordered = order if order is not None else known_terms
    segments: list[Segment] = []
    audio: list[str | None] = []
    for term in ordered:
        ids = selections.get(term) or []
        if not ids:
            continue
        for asset_id in ids:
            catalog.get_image(asset_id, term=term)  # raises UnknownAsset
        try:
            clip = catalog.get_audio(term)
            duration, audio_id = clip.duration, clip.asset_id
        except NotFound:
            duration, audio_id = default_duration, None
        segments.append(Segment(term=term, image_ids=list(ids), duration=duration))
        audio.append(audio_id)
    if not segments:
        raise EmptySelection("no term has any selected image")
    return MediaManifest(segments=segments, fps=fps, audio=audio)


def _letterbox(img: Image.Image, size: tuple[int, int], origin: str) -> Image.Image:
    target_w, target_h = size
    scale = min(target_w / img.width, target_h / img.height)
    new_w = max(1, round_half_up(img.width * scale))
    new_h = max(1, round_half_up(img.height * scale))
    resample = Image.NEAREST if origin == "generated" else Image.LANCZOS
    resized = img.convert("RGB").resize((new_w, new_h), resample)
    canvas = Image.new("RGB", size, (0, 0, 0))
    canvas.paste(resized, ((target_w - new_w) // 2, (target_h - new_h) // 2))
    return canvas


def _split_frames(n_total: int, n_images: int) -> list[int]:
    # Cumulative rounding: allocations sum to n_total exactly.
    edges = [round_half_up(i * n_total / n_images) for i in range(n_images + 1)]
    return [edges[i + 1] - edges[i] for i in range(n_images)]


def render_silent_video(
    manifest: MediaManifest,
    catalog: Catalog,
    frame_size: tuple[int, int] = DEFAULT_FRAME_SIZE,
) -> SilentVideo:
    """Hold each selected image for its share of the segment at manifest.fps."""
    jpeg_frames: list[bytes] = []
    for seg in manifest.segments:
        n_seg = round_half_up(seg.duration * manifest.fps)
        counts = _split_frames(n_seg, len(seg.image_ids))
        for asset_id, count in zip(seg.image_ids, counts):
            if count == 0:
                continue
            asset = catalog.get_image(asset_id, term=seg.term)
            try:
                img = Image.open(io.BytesIO(asset.bytes))
            except Exception as exc:
                raise DecodeError(f"asset {asset_id} is unreadable: {exc}") from exc
            framed = _letterbox(img, frame_size, asset.origin)
            buf = io.BytesIO()
            framed.save(buf, format="JPEG", quality=JPEG_QUALITY)
            jpeg_frames.extend([buf.getvalue()] * count)
    container = write_avi(
        jpeg_frames, manifest.fps, frame_size[0], frame_size[1], pcm=None
    )
    return SilentVideo(
        container=container,
        frame_count=len(jpeg_frames),
        fps=manifest.fps,
        width=frame_size[0],
        height=frame_size[1],
    )


def pcm_to_wav(pcm: bytes) -> bytes:
    import wave

    buf = io.BytesIO()
    with wave.open(buf, "wb") as wav:
        wav.setnchannels(1)
        wav.setsampwidth(2)
        wav.setframerate(SAMPLE_RATE)
        wav.writeframes(pcm)
    return buf.getvalue()


def wav_to_pcm(data: bytes) -> bytes:
    import wave

    with wave.open(io.BytesIO(data)) as wav:
        return wav.readframes(wav.getnframes())


def assemble_audio(manifest: MediaManifest, catalog: Catalog) -> AudioAsset:
    """Concatenate per-segment clips; audio-less segments contribute silence."""
    parts: list[bytes] = []
    for seg, audio_id in zip(manifest.segments, manifest.audio):
        if audio_id is None:
            n_samples = round_half_up(seg.duration * SAMPLE_RATE)
            parts.append(b"\x00\x00" * n_samples)
            continue
        clip = catalog.get_audio(seg.term)
        if clip.asset_id != audio_id:
            raise NotFound(
                f"audio id {audio_id} for term {seg.term!r} no longer resolves"
            )
        parts.append(wav_to_pcm(clip.bytes))
    pcm = b"".join(parts)
    wav_bytes = pcm_to_wav(pcm)
    import hashlib

    return AudioAsset(
        asset_id=hashlib.sha256(wav_bytes).hexdigest(),
        term="",
        bytes=wav_bytes,
        duration=len(pcm) / 2 / SAMPLE_RATE,
    )


# --- muxers -------------------------------------------------------------


class BuiltinAviMuxer:
    """Pure-Python stream copy: video chunks are moved into the output
    untouched and the PCM track is interleaved alongside them."""

    suffix = ".avi"

    def __call__(self, video_path: Path, wav_path: Path, out_path: Path) -> None:
        parsed = read_avi(video_path)
        pcm = wav_to_pcm(Path(wav_path).read_bytes())
        out = write_avi(
            parsed.video_chunks, parsed.fps, parsed.width, parsed.height, pcm=pcm
        )
        Path(out_path).write_bytes(out)


class FfmpegMuxer:
    """Reference muxer: shells out to an FFmpeg-compatible tool with -c:v copy."""

    suffix = ".mp4"

    def __init__(self, binary: str | None = None):
        self.binary = binary or shutil.which("ffmpeg")
        if self.binary is None:
            raise MuxerUnavailable("no ffmpeg binary found on PATH")

    def __call__(self, video_path: Path, wav_path: Path, out_path: Path) -> None:
        cmd = [
            self.binary, "-y", "-loglevel", "error",
            "-i", str(video_path), "-i", str(wav_path),
            "-c:v", "copy", "-c:a", "aac",
            str(out_path),
        ]
        subprocess.run(cmd, check=True, capture_output=True)


def resolve_muxer(name: str = "auto"):
    """auto -> ffmpeg when present, else builtin; "bundle"/None -> no muxer."""
    if name in (None, "bundle", "none"):
        return None
    if name == "ffmpeg":
        return FfmpegMuxer()
    if name == "builtin":
        return BuiltinAviMuxer()
    if name == "auto":
        try:
            return FfmpegMuxer()
        except MuxerUnavailable:
            return BuiltinAviMuxer()
    raise ValueError(f"unknown muxer {name!r}")


def mux(video: SilentVideo, audio: AudioAsset, muxer) -> FinalVideo:
    """Stream-copy multiplex; the video elementary stream is never re-encoded."""
    if muxer is None:
        raise MuxerUnavailable("no muxer configured")
    delta = abs(video.duration - audio.duration)
    if delta > MUX_TOLERANCE_SECONDS:
        raise DurationMismatch(
            f"video {video.duration:.3f}s vs audio {audio.duration:.3f}s "
            f"(delta {delta * 1000:.1f} ms)"
        )
    suffix = getattr(muxer, "suffix", ".avi")
    with tempfile.TemporaryDirectory() as tmp:
        tmp_path = Path(tmp)
        video_path = tmp_path / "silent.avi"
        wav_path = tmp_path / "audio.wav"
        out_path = tmp_path / f"final{suffix}"
        video_path.write_bytes(video.container)
        wav_path.write_bytes(audio.bytes)
        muxer(video_path, wav_path, out_path)
        container = out_path.read_bytes()
    return FinalVideo(container=container, suffix=suffix, duration=video.duration)


# --- one-call composition -------------------------------------------------


@dataclass
class ComposeResult:
    manifest_path: Path
    silent_path: Path
    final_path: Path | None  # None when the bundle fallback was taken
    bundle_dir: Path | None = None


def write_bundle(
    manifest: MediaManifest,
    video: SilentVideo,
    audio: AudioAsset,
    out_dir: Path,
) -> Path:
    """Fallback layout: out/frames/%05d.png + out/audio.wav + out/manifest.json."""
    frames_dir = out_dir / "frames"
    frames_dir.mkdir(parents=True, exist_ok=True)
    parsed = read_avi(video.container)
    for i, chunk in enumerate(parsed.video_chunks):
        Image.open(io.BytesIO(chunk)).save(frames_dir / f"{i:05d}.png")
    (out_dir / "audio.wav").write_bytes(audio.bytes)
    (out_dir / "manifest.json").write_text(manifest.to_json(), encoding="utf-8")
    return out_dir


def compose(
    manifest: MediaManifest,
    catalog: Catalog,
    out_dir: str | Path,
    muxer="auto",
    frame_size: tuple[int, int] = DEFAULT_FRAME_SIZE,
) -> ComposeResult:
    """Render, assemble and mux into out_dir; bundle when no muxer is usable."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if isinstance(muxer, str):
        try:
            muxer = resolve_muxer(muxer)
        except MuxerUnavailable:
            muxer = None

    video = render_silent_video(manifest, catalog, frame_size)
    audio = assemble_audio(manifest, catalog)
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(manifest.to_json(), encoding="utf-8")
    silent_path = out_dir / "silent.avi"
    silent_path.write_bytes(video.container)

    try:
        final = mux(video, audio, muxer)
    except MuxerUnavailable:
        bundle = write_bundle(manifest, video, audio, out_dir / "bundle")
        return ComposeResult(
            manifest_path=manifest_path,
            silent_path=silent_path,
            final_path=None,
            bundle_dir=bundle,
        )
    final_path = out_dir / f"final{final.suffix}"
    final_path.write_bytes(final.container)
    return ComposeResult(
        manifest_path=manifest_path, silent_path=silent_path, final_path=final_path
    )
