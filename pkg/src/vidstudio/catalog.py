"""Content-addressed store of per-term image candidates and audio clips.

Layout on disk:
    <root>/index.json
    <root>/images/<term>/<asset_id>.png
    <root>/audio/<term>.wav

Writes are serialized through one lock per catalog instance and the index is
replaced atomically (write-temp-then-rename), so concurrent readers always
observe a complete index.
"""

from __future__ import annotations

import hashlib
import io
import json
import os
import threading
import wave
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Protocol

from PIL import Image, UnidentifiedImageError

from .errors import AdapterError, DecodeError, NotFound, UnknownAsset

SAMPLE_RATE = 16000


@dataclass(frozen=True)
class ImageAsset:
    asset_id: str
    term: str
    bytes: bytes
    origin: str  # "library" | "generated"
    width: int
    height: int


@dataclass(frozen=True)
class AudioAsset:
    asset_id: str
    term: str
    bytes: bytes
    duration: float  # seconds, sample_count / 16000


class ImageEnhancer(Protocol):
    """Optional enhancement hook applied to generated frames before storage."""

    def __call__(self, png: bytes) -> bytes: ...


def identity_enhancer(png: bytes) -> bytes:
    return png


class ImageTextScorer(Protocol):
    def __call__(self, term: str, asset: ImageAsset, position: int) -> float: ...


def stub_scorer(term: str, asset: ImageAsset, position: int) -> float:
    """Term equality dominates; among equals, later (more recent) wins."""
    return (1000.0 if asset.term == term else 0.0) + float(position)


def _decode_png(data: bytes) -> tuple[int, int]:
    try:
        with Image.open(io.BytesIO(data)) as img:
            if img.format != "PNG":
                raise DecodeError(f"expected PNG, got {img.format}")
            return img.width, img.height
    except UnidentifiedImageError as exc:
        raise DecodeError("bytes are not a decodable image") from exc


def _read_wav_duration(data: bytes) -> float:
    try:
        with wave.open(io.BytesIO(data)) as wav:
            if (wav.getsampwidth(), wav.getnchannels(), wav.getframerate()) != (
                2, 1, SAMPLE_RATE,
            ):
                raise DecodeError("audio must be PCM 16-bit mono 16 kHz")
            frames = wav.getnframes()
    except (wave.Error, EOFError) as exc:
        raise DecodeError(f"not a readable WAV stream: {exc}") from exc
    if frames == 0:
        raise DecodeError("audio contains no samples")
    return frames / SAMPLE_RATE


class Catalog:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self._lock = threading.Lock()
        (self.root / "images").mkdir(parents=True, exist_ok=True)
        (self.root / "audio").mkdir(parents=True, exist_ok=True)
        if not self._index_path.exists():
            self._write_index({"terms": {}})

    @property
    def _index_path(self) -> Path:
        return self.root / "index.json"

    def _read_index(self) -> dict:
        return json.loads(self._index_path.read_text(encoding="utf-8"))

    def _write_index(self, index: dict) -> None:
        tmp = self._index_path.with_suffix(".json.tmp")
        tmp.write_text(
            json.dumps(index, indent=2, sort_keys=True), encoding="utf-8"
        )
        os.replace(tmp, self._index_path)

    # --- images ---------------------------------------------------------

    def put_image(
        self,
        term: str,
        data: bytes,
        origin: str = "library",
        enhancer: ImageEnhancer | None = None,
    ) -> str:
        if not term:
            raise ValueError("term must be non-empty")
        if origin == "generated" and enhancer is not None:
            data = enhancer(data)
        _decode_png(data)
        asset_id = hashlib.sha256(data).hexdigest()
        with self._lock:
            term_dir = self.root / "images" / term
            term_dir.mkdir(parents=True, exist_ok=True)
            path = term_dir / f"{asset_id}.png"
            if not path.exists():
                path.write_bytes(data)
            index = self._read_index()
            entry = index["terms"].setdefault(term, {"images": [], "audio": None})
            if asset_id not in entry["images"]:
                entry["images"].append(asset_id)
                entry.setdefault("origins", {})[asset_id] = origin
                self._write_index(index)
        return asset_id

    def query_images(self, term: str) -> list[ImageAsset]:
        index = self._read_index()
        entry = index["terms"].get(term)
        if not entry:
            return []
        assets = []
        for asset_id in entry["images"]:
            data = (self.root / "images" / term / f"{asset_id}.png").read_bytes()
            width, height = _decode_png(data)
            assets.append(
                ImageAsset(
                    asset_id=asset_id,
                    term=term,
                    bytes=data,
                    origin=entry.get("origins", {}).get(asset_id, "library"),
                    width=width,
                    height=height,
                )
            )
        return assets

    def get_image(self, asset_id: str, term: str | None = None) -> ImageAsset:
        """Resolve an asset id, optionally scoped to one term's candidates.

        Identical bytes stored under several terms share an id, so the term
        argument disambiguates which candidate list the caller means.
        """
        index = self._read_index()
        candidates = (
            [(term, index["terms"].get(term))] if term is not None
            else list(index["terms"].items())
        )
        for term_name, entry in candidates:
            if entry and asset_id in entry["images"]:
                path = self.root / "images" / term_name / f"{asset_id}.png"
                try:
                    data = path.read_bytes()
                except FileNotFoundError:
                    raise UnknownAsset(f"asset {asset_id} indexed but file missing")
                width, height = _decode_png(data)
                return ImageAsset(
                    asset_id=asset_id,
                    term=term_name,
                    bytes=data,
                    origin=entry.get("origins", {}).get(asset_id, "library"),
                    width=width,
                    height=height,
                )
        scope = f" under term {term!r}" if term is not None else ""
        raise UnknownAsset(f"image asset {asset_id} not in catalog{scope}")

    # --- audio ----------------------------------------------------------

    def put_audio(self, term: str, data: bytes) -> str:
        if not term:
            raise ValueError("term must be non-empty")
        _read_wav_duration(data)
        asset_id = hashlib.sha256(data).hexdigest()
        with self._lock:
            (self.root / "audio" / f"{term}.wav").write_bytes(data)
            index = self._read_index()
            entry = index["terms"].setdefault(term, {"images": [], "audio": None})
            entry["audio"] = asset_id
            self._write_index(index)
        return asset_id

    def get_audio(self, term: str) -> AudioAsset:
        index = self._read_index()
        entry = index["terms"].get(term)
        if not entry or not entry.get("audio"):
            raise NotFound(f"no audio clip stored for term {term!r}")
        data = (self.root / "audio" / f"{term}.wav").read_bytes()
        return AudioAsset(
            asset_id=entry["audio"],
            term=term,
            bytes=data,
            duration=_read_wav_duration(data),
        )

    def has_audio(self, term: str) -> bool:
        entry = self._read_index()["terms"].get(term)
        return bool(entry and entry.get("audio"))

    def terms(self) -> list[str]:
        return sorted(self._read_index()["terms"])

    # --- ranking ----------------------------------------------------------

    def rank_candidates(
        self,
        term: str,
        assets: list[ImageAsset] | None = None,
        scorer: ImageTextScorer = stub_scorer,
    ) -> list[ImageAsset]:
        """Sort candidates by descending score; ties fall back to asset_id."""
        if assets is None:
            assets = self.query_images(term)
        try:
            scored = [
                (scorer(term, asset, pos), asset)
                for pos, asset in enumerate(assets)
            ]
        except Exception as exc:
            if isinstance(exc, AdapterError):
                raise
            raise AdapterError(f"scorer failed: {exc}") from exc
        scored.sort(key=lambda pair: (-pair[0], pair[1].asset_id))
        return [asset for _, asset in scored]

    def rescan(self) -> dict:
        """Rebuild the index from the storage directory (consistency check).

        Directories do not record insertion order, so ids already present in
        the live index keep their order; unknown files are appended sorted.
        """
        index: dict = {"terms": {}}
        old = self._read_index()
        for term_dir in sorted((self.root / "images").iterdir()):
            if not term_dir.is_dir():
                continue
            ids = sorted(p.stem for p in term_dir.glob("*.png"))
            old_entry = old["terms"].get(term_dir.name, {})
            known = [i for i in old_entry.get("images", []) if i in ids]
            extra = [i for i in ids if i not in known]
            entry = index["terms"].setdefault(
                term_dir.name, {"images": [], "audio": None}
            )
            entry["images"] = known + extra
            if old_entry.get("origins"):
                entry["origins"] = {
                    k: v for k, v in old_entry["origins"].items() if k in ids
                }
        for wav_path in sorted((self.root / "audio").glob("*.wav")):
            term = wav_path.stem
            entry = index["terms"].setdefault(term, {"images": [], "audio": None})
            entry["audio"] = hashlib.sha256(wav_path.read_bytes()).hexdigest()
        return index
