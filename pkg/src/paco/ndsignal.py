"""N-dimensional signals, erasure masks, and bit-exact media I/O.

A :class:`Signal` is an immutable real-valued sample array of any dimension
together with its dynamic-range peak (255 for 8-bit images, 32768 for PCM16
audio).  Samples are held as float64 regardless of the media bit depth;
quantization happens only when saving.

Supported media formats are deliberately minimal: binary PGM (P5) and PPM
(P6) with maxval 255, RIFF WAV PCM16 mono, raw one-byte-per-sample mask
files, and directories of numbered frames for video.
"""

from __future__ import annotations

import os
import re
import wave
from dataclasses import dataclass

import numpy as np


class MediaFormatError(ValueError):
    """Raised when a media file cannot be parsed or violates a precondition."""


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Signal:
    """Immutable N-dimensional signal with a dynamic-range peak.

    Samples are stored row-major as float64; ``vectorize`` returns the
    row-major flattening.  Instances are safe to share across threads.
    """

    samples: np.ndarray
    peak: float = 1.0

    def __post_init__(self):
        samples = _freeze(np.asarray(self.samples, dtype=np.float64))
        object.__setattr__(self, "samples", samples)
        if not self.peak > 0:
            raise ValueError(f"peak must be positive, got {self.peak}")

    @property
    def shape(self) -> tuple:
        return self.samples.shape

    @property
    def size(self) -> int:
        return self.samples.size

    def vectorize(self) -> np.ndarray:
        """Row-major flattening of the samples (read-only view)."""
        return self.samples.reshape(-1)


def vectorize(signal: Signal) -> np.ndarray:
    """Flatten a signal to a linear array in row-major order."""
    return signal.vectorize()


def devectorize(values, shape, peak: float = 1.0) -> Signal:
    """Reshape a linear array back into a signal of the given shape."""
    values = np.asarray(values, dtype=np.float64)
    n = int(np.prod(shape))
    if values.size != n:
        raise ValueError(f"expected {n} samples for shape {tuple(shape)}, got {values.size}")
    return Signal(values.reshape(tuple(shape)), peak)


@dataclass(frozen=True)
class Mask:
    """Per-sample known/missing indicator. ``known[i]`` True means observed."""

    known: np.ndarray

    def __post_init__(self):
        known = _freeze(np.asarray(self.known, dtype=bool))
        object.__setattr__(self, "known", known)

    @property
    def shape(self) -> tuple:
        return self.known.shape

    @property
    def missing(self) -> np.ndarray:
        return ~self.known

    @property
    def n_missing(self) -> int:
        return int(np.count_nonzero(~self.known))

    @property
    def all_known(self) -> bool:
        return bool(self.known.all())

    def check_shape(self, signal: Signal) -> None:
        if self.shape != signal.shape:
            raise ValueError(f"mask shape {self.shape} does not match signal shape {signal.shape}")


def quantize(samples: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Round half away from zero and clamp to [lo, hi]."""
    rounded = np.copysign(np.floor(np.abs(samples) + 0.5), samples)
    return np.clip(rounded, lo, hi)


# ---------------------------------------------------------------------------
# PGM / PPM
# ---------------------------------------------------------------------------

def _read_pnm_tokens(data: bytes, count: int, start: int):
    """Read `count` whitespace-separated ASCII tokens, honoring # comments."""
    tokens = []
    i = start
    while len(tokens) < count:
        while i < len(data) and data[i : i + 1].isspace():
            i += 1
        if i < len(data) and data[i : i + 1] == b"#":
            while i < len(data) and data[i] != 0x0A:
                i += 1
            continue
        j = i
        while j < len(data) and not data[j : j + 1].isspace():
            j += 1
        if j == i:
            raise MediaFormatError("truncated PNM header")
        tokens.append(data[i:j])
        i = j
    # exactly one whitespace byte separates the header from the payload
    if i >= len(data) or not data[i : i + 1].isspace():
        raise MediaFormatError("missing whitespace after PNM header")
    return tokens, i + 1


def _parse_pnm(data: bytes):
    magic = data[:2]
    if magic not in (b"P5", b"P6"):
        raise MediaFormatError(f"not a binary PGM/PPM file (magic {magic!r})")
    tokens, payload_start = _read_pnm_tokens(data, 3, 2)
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError:
        raise MediaFormatError("non-numeric PNM header field") from None
    if width <= 0 or height <= 0:
        raise MediaFormatError(f"invalid PNM dimensions {width}x{height}")
    if maxval != 255:
        raise MediaFormatError(f"unsupported maxval {maxval} (only 255)")
    channels = 1 if magic == b"P5" else 3
    expected = width * height * channels
    payload = data[payload_start : payload_start + expected]
    if len(payload) != expected:
        raise MediaFormatError(f"truncated payload: expected {expected} bytes, got {len(payload)}")
    grid = np.frombuffer(payload, dtype=np.uint8).reshape(height, width, channels)
    return grid, channels


def load_image(path) -> list[Signal]:
    """Load a binary PGM/PPM image as one Signal per channel, peak 255."""
    with open(path, "rb") as f:
        data = f.read()
    grid, channels = _parse_pnm(data)
    return [Signal(grid[:, :, c].astype(np.float64), peak=255.0) for c in range(channels)]


def save_image(channels, path) -> None:
    """Save 1 (PGM) or 3 (PPM) channel Signals; values quantized to [0, 255]."""
    channels = list(channels)
    if len(channels) not in (1, 3):
        raise ValueError(f"expected 1 or 3 channels, got {len(channels)}")
    shape = channels[0].shape
    if len(shape) != 2 or any(c.shape != shape for c in channels):
        raise ValueError("all channels must share one 2-D shape")
    height, width = shape
    planes = [quantize(c.samples, 0, 255).astype(np.uint8) for c in channels]
    magic = b"P5" if len(planes) == 1 else b"P6"
    with open(path, "wb") as f:
        f.write(magic + b"\n%d %d\n255\n" % (width, height))
        f.write(np.stack(planes, axis=-1).tobytes())


# ---------------------------------------------------------------------------
# WAV (PCM16 mono)
# ---------------------------------------------------------------------------

def load_audio(path) -> tuple[Signal, int]:
    """Load a mono PCM16 WAV file. Returns (signal with peak 32768, sample rate)."""
    try:
        with wave.open(str(path), "rb") as w:
            if w.getcomptype() != "NONE":
                raise MediaFormatError(f"unsupported WAV codec {w.getcomptype()!r} (PCM only)")
            if w.getnchannels() != 1:
                raise MediaFormatError(f"expected mono audio, got {w.getnchannels()} channels")
            if w.getsampwidth() != 2:
                raise MediaFormatError(f"expected 16-bit samples, got {8 * w.getsampwidth()}-bit")
            rate = w.getframerate()
            raw = w.readframes(w.getnframes())
    except wave.Error as exc:
        raise MediaFormatError(f"malformed WAV file: {exc}") from None
    samples = np.frombuffer(raw, dtype="<i2").astype(np.float64)
    return Signal(samples, peak=32768.0), rate


def save_audio(signal: Signal, path, sample_rate: int) -> None:
    """Save a 1-D signal as mono PCM16 WAV; values quantized to int16 range."""
    if signal.samples.ndim != 1:
        raise ValueError("audio signal must be 1-D")
    pcm = quantize(signal.samples, -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(sample_rate)
        w.writeframes(pcm.tobytes())


# ---------------------------------------------------------------------------
# Frame directories (video)
# ---------------------------------------------------------------------------

_FRAME_RE = re.compile(r"(\d+)\.(pgm|ppm)$")


def _list_frames(directory):
    entries = []
    for name in os.listdir(directory):
        match = _FRAME_RE.search(name)
        if match:
            entries.append((int(match.group(1)), name))
    if not entries:
        raise MediaFormatError(f"no numbered .pgm/.ppm frames in {directory}")
    entries.sort()
    numbers = [num for num, _ in entries]
    if numbers != list(range(numbers[0], numbers[0] + len(numbers))):
        raise MediaFormatError(f"gap in frame numbering under {directory}: {numbers}")
    return [os.path.join(directory, name) for _, name in entries]


def load_frames(directory) -> list[Signal]:
    """Load a directory of numbered frames as one 3-D Signal per channel.

    Time is the first axis. Frames must agree in size and channel count.
    """
    paths = _list_frames(directory)
    per_frame = [load_image(p) for p in paths]
    channels = len(per_frame[0])
    shape = per_frame[0][0].shape
    for p, frame in zip(paths, per_frame):
        if len(frame) != channels or frame[0].shape != shape:
            raise MediaFormatError(f"inconsistent frame size or channels at {p}")
    return [
        Signal(np.stack([frame[c].samples for frame in per_frame]), peak=255.0)
        for c in range(channels)
    ]


def save_frames(channels, directory, prefix: str = "frame") -> None:
    """Save 3-D channel Signals as numbered PGM/PPM frames (%04d suffix)."""
    channels = list(channels)
    ext = "pgm" if len(channels) == 1 else "ppm"
    os.makedirs(directory, exist_ok=True)
    n_frames = channels[0].shape[0]
    for t in range(n_frames):
        frame = [Signal(c.samples[t], peak=c.peak) for c in channels]
        save_image(frame, os.path.join(directory, f"{prefix}{t:04d}.{ext}"))


# ---------------------------------------------------------------------------
# Masks
# ---------------------------------------------------------------------------

def _mask_from_bytes(data: bytes, shape) -> Mask:
    n = int(np.prod(shape))
    if len(data) != n:
        raise MediaFormatError(f"mask payload has {len(data)} bytes, expected {n}")
    known = np.frombuffer(data, dtype=np.uint8).reshape(tuple(shape)) == 0
    return Mask(known)


def load_mask(path, shape) -> Mask:
    """Load an erasure mask. Byte 0 means known, nonzero means missing.

    Accepts a PGM file, a raw one-byte-per-sample file, or (for 3-D shapes)
    a directory of per-frame PGM masks. A single 2-D PGM given for a 3-D
    shape is replicated across the time axis.
    """
    shape = tuple(shape)
    if os.path.isdir(path):
        if len(shape) != 3:
            raise MediaFormatError(f"mask directory requires a 3-D shape, got {shape}")
        frames = [load_mask(p, shape[1:]) for p in _list_frames(path)]
        if len(frames) != shape[0]:
            raise MediaFormatError(f"mask directory holds {len(frames)} frames, expected {shape[0]}")
        return Mask(np.stack([f.known for f in frames]))
    with open(path, "rb") as f:
        data = f.read()
    if data[:2] == b"P5":
        grid, _ = _parse_pnm(data)
        plane = grid[:, :, 0]
        if len(shape) == 3 and plane.shape == shape[1:]:
            return Mask(np.broadcast_to(plane == 0, shape).copy())
        if plane.shape != shape:
            raise MediaFormatError(f"mask shape {plane.shape} does not match {shape}")
        return Mask(plane == 0)
    return _mask_from_bytes(data, shape)


def save_mask(mask: Mask, path) -> None:
    """Save a mask (0 = known, 255 = missing).

    2-D masks become PGM files, 1-D masks raw byte files, 3-D masks a
    directory of per-frame PGM files.
    """
    payload = np.where(mask.known, 0, 255).astype(np.uint8)
    if payload.ndim == 2:
        save_image([Signal(payload, peak=255.0)], path)
    elif payload.ndim == 3:
        os.makedirs(path, exist_ok=True)
        for t in range(payload.shape[0]):
            save_image([Signal(payload[t], peak=255.0)], os.path.join(path, f"mask{t:04d}.pgm"))
    else:
        with open(path, "wb") as f:
            f.write(payload.tobytes())
