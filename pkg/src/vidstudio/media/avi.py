"""Minimal RIFF/AVI writer and reader for MJPEG video with optional PCM audio.

Writing our own container keeps silent-video bytes deterministic and makes
stream-copy muxing verifiable without external tools: the video elementary
stream is exactly the ordered concatenation of the '00dc' chunk payloads.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import DecodeError

SAMPLE_RATE = 16000
BYTES_PER_SAMPLE = 2  # PCM 16-bit mono


def _chunk(fourcc: bytes, payload: bytes) -> bytes:
    padded = payload + (b"\x00" if len(payload) % 2 else b"")
    return fourcc + struct.pack("<I", len(payload)) + padded


def _list(list_type: bytes, payload: bytes) -> bytes:
    return _chunk(b"LIST", list_type + payload)


def _video_stream_headers(n_frames: int, fps: int, width: int, height: int,
                          max_chunk: int) -> bytes:
    strh = struct.pack(
        "<4s4sIHHIIIIIIIIhhhh",
        b"vids", b"MJPG",
        0, 0, 0, 0,
        1, fps,          # scale / rate
        0, n_frames,
        max_chunk, 10000, 0,
        0, 0, width, height,
    )
    strf = struct.pack(
        "<IiiHH4sIiiII",
        40, width, height, 1, 24, b"MJPG",
        width * height * 3, 0, 0, 0, 0,
    )
    return _list(b"strl", _chunk(b"strh", strh) + _chunk(b"strf", strf))


def _audio_stream_headers(n_samples: int, max_chunk: int) -> bytes:
    strh = struct.pack(
        "<4s4sIHHIIIIIIIIhhhh",
        b"auds", b"\x00\x00\x00\x00",
        0, 0, 0, 0,
        1, SAMPLE_RATE,
        0, n_samples,
        max_chunk, 0, BYTES_PER_SAMPLE,
        0, 0, 0, 0,
    )
    strf = struct.pack(
        "<HHIIHH",
        1, 1, SAMPLE_RATE, SAMPLE_RATE * BYTES_PER_SAMPLE, BYTES_PER_SAMPLE, 16,
    )
    return _list(b"strl", _chunk(b"strh", strh) + _chunk(b"strf", strf))


def _audio_chunk_sizes(n_samples: int, n_frames: int, fps: int) -> list[int]:
    # One audio chunk per video frame, cumulative so rounding never drifts;
    # any tail beyond the video duration lands in one extra chunk.
    edges = [
        min(round((i * SAMPLE_RATE) / fps), n_samples) for i in range(n_frames + 1)
    ]
    sizes = [edges[i + 1] - edges[i] for i in range(n_frames)]
    if edges and edges[-1] < n_samples:
        sizes.append(n_samples - edges[-1])
    return sizes


def write_avi(
    jpeg_frames: list[bytes],
    fps: int,
    width: int,
    height: int,
    pcm: bytes | None = None,
) -> bytes:
    """Serialize MJPEG frames (and optional PCM track) into AVI bytes."""
    if fps < 1:
        raise ValueError("fps must be >= 1")
    n_frames = len(jpeg_frames)
    max_vchunk = max((len(f) for f in jpeg_frames), default=0)

    movi_parts: list[bytes] = []
    index_entries: list[tuple[bytes, int, int]] = []  # fourcc, offset, size
    offset = 4  # relative to the 'movi' fourcc

    def push(fourcc: bytes, payload: bytes) -> None:
        nonlocal offset
        movi_parts.append(_chunk(fourcc, payload))
        index_entries.append((fourcc, offset, len(payload)))
        offset += len(movi_parts[-1])

    if pcm is None:
        for frame in jpeg_frames:
            push(b"00dc", frame)
    else:
        n_samples = len(pcm) // BYTES_PER_SAMPLE
        sizes = _audio_chunk_sizes(n_samples, n_frames, fps)
        cursor = 0
        for i, frame in enumerate(jpeg_frames):
            push(b"00dc", frame)
            if i < len(sizes):
                take = sizes[i] * BYTES_PER_SAMPLE
                push(b"01wb", pcm[cursor : cursor + take])
                cursor += take
        for size in sizes[n_frames:]:
            take = size * BYTES_PER_SAMPLE
            push(b"01wb", pcm[cursor : cursor + take])
            cursor += take

    movi = _list(b"movi", b"".join(movi_parts))
    idx1 = _chunk(
        b"idx1",
        b"".join(
            fourcc + struct.pack("<III", 0x10, off, size)
            for fourcc, off, size in index_entries
        ),
    )

    streams = _video_stream_headers(n_frames, fps, width, height, max_vchunk)
    n_streams = 1
    if pcm is not None:
        n_samples = len(pcm) // BYTES_PER_SAMPLE
        max_achunk = max(
            (s * BYTES_PER_SAMPLE for s in _audio_chunk_sizes(n_samples, n_frames, fps)),
            default=0,
        )
        streams += _audio_stream_headers(n_samples, max_achunk)
        n_streams = 2

    avih = struct.pack(
        "<IIIIIIIIIIIIII",
        round(1_000_000 / fps), 0, 0,
        0x10,  # AVIF_HASINDEX
        n_frames, 0, n_streams, max_vchunk,
        width, height, 0, 0, 0, 0,
    )
    hdrl = _list(b"hdrl", _chunk(b"avih", avih) + streams)
    riff_payload = b"AVI " + hdrl + movi + idx1
    return b"RIFF" + struct.pack("<I", len(riff_payload)) + riff_payload


@dataclass
class ParsedAvi:
    width: int
    height: int
    fps: int
    n_frames: int
    video_chunks: list[bytes] = field(default_factory=list)
    pcm: bytes = b""
    has_audio: bool = False

    @property
    def duration(self) -> float:
        return self.n_frames / self.fps

    @property
    def audio_duration(self) -> float:
        return len(self.pcm) / BYTES_PER_SAMPLE / SAMPLE_RATE

    def video_stream_hash(self) -> str:
        digest = hashlib.sha256()
        for chunk in self.video_chunks:
            digest.update(chunk)
        return digest.hexdigest()


def _iter_chunks(data: bytes, start: int, end: int):
    pos = start
    while pos + 8 <= end:
        fourcc = data[pos : pos + 4]
        size = struct.unpack_from("<I", data, pos + 4)[0]
        yield fourcc, pos + 8, size
        pos += 8 + size + (size % 2)


def read_avi(data: bytes | str | Path) -> ParsedAvi:
    """Parse the subset of AVI this package writes (plus common variants)."""
    if isinstance(data, (str, Path)):
        data = Path(data).read_bytes()
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"AVI ":
        raise DecodeError("not an AVI (RIFF/AVI ) file")

    width = height = fps = n_frames = 0
    video_chunks: list[bytes] = []
    audio_parts: list[bytes] = []
    has_audio = False
    current_stream: bytes | None = None

    def walk(start: int, end: int) -> None:
        nonlocal width, height, fps, n_frames, has_audio, current_stream
        for fourcc, payload_at, size in _iter_chunks(data, start, end):
            if fourcc == b"LIST":
                walk(payload_at + 4, payload_at + size)
            elif fourcc == b"avih":
                fields = struct.unpack_from("<IIIIIIIIII", data, payload_at)
                n_frames = fields[4]
                width, height = fields[8], fields[9]
            elif fourcc == b"strh":
                current_stream = data[payload_at : payload_at + 4]
                if current_stream == b"vids":
                    scale, rate = struct.unpack_from("<II", data, payload_at + 20)
                    fps = round(rate / scale) if scale else 0
                elif current_stream == b"auds":
                    has_audio = True
            elif fourcc.endswith(b"dc") or fourcc.endswith(b"db"):
                video_chunks.append(data[payload_at : payload_at + size])
            elif fourcc.endswith(b"wb"):
                audio_parts.append(data[payload_at : payload_at + size])

    walk(12, len(data))
    if fps == 0:
        raise DecodeError("AVI has no video stream header")
    return ParsedAvi(
        width=width,
        height=height,
        fps=fps,
        n_frames=n_frames or len(video_chunks),
        video_chunks=video_chunks,
        pcm=b"".join(audio_parts),
        has_audio=has_audio,
    )
