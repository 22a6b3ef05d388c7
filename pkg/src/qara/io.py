"""File formats, synthetic data and run manifests."""
from __future__ import annotations

import json
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from qara.filters import GrayImage, SignalBuffer


class PGMError(ValueError):
    pass


class MalformedHeaderError(PGMError):
    pass


class UnsupportedDepthError(PGMError):
    pass


class TruncatedDataError(PGMError):
    pass


class SignalParseError(ValueError):
    def __init__(self, line: int, token: str):
        super().__init__(f"line {line}: expected an integer, got {token!r}")
        self.line = line


def _header_tokens(data: bytes, count: int) -> tuple[list, int]:
    tokens = []
    pos = 0
    while len(tokens) < count:
        while pos < len(data) and (data[pos : pos + 1].isspace() or data[pos : pos + 1] == b"#"):
            if data[pos : pos + 1] == b"#":
                end = data.find(b"\n", pos)
                pos = len(data) if end < 0 else end + 1
            else:
                pos += 1
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise MalformedHeaderError("unexpected end of header")
        tokens.append(data[start:pos])
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise MalformedHeaderError("header must end with a single whitespace byte")
    return tokens, pos + 1


def parse_pgm(data: bytes) -> GrayImage:
    if not data.startswith(b"P5"):
        raise MalformedHeaderError("not a binary PGM (missing P5 magic)")
    tokens, offset = _header_tokens(data, 4)
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise MalformedHeaderError(f"non-numeric header field: {exc}") from None
    if width < 1 or height < 1:
        raise MalformedHeaderError(f"invalid dimensions {width}x{height}")
    if maxval != 255:
        raise UnsupportedDepthError(f"only 8-bit PGM (maxval 255) is supported, got {maxval}")
    payload = data[offset : offset + width * height]
    if len(payload) < width * height:
        raise TruncatedDataError(f"expected {width * height} pixel bytes, found {len(payload)}")
    return GrayImage(np.frombuffer(payload, dtype=np.uint8).reshape(height, width))


def format_pgm(img: GrayImage) -> bytes:
    return f"P5\n{img.width} {img.height}\n255\n".encode("ascii") + img.pixels.tobytes()


def read_pgm(path) -> GrayImage:
    return parse_pgm(Path(path).read_bytes())


def write_pgm(img: GrayImage, path) -> None:
    Path(path).write_bytes(format_pgm(img))


_HEADER_NAMES = {"sample", "samples", "value", "values"}


def parse_signal_csv(text: str, bit_width: int = 8) -> SignalBuffer:
    lines = text.splitlines()
    samples = []
    for lineno, line in enumerate(lines, start=1):
        token = line.split(",")[0].strip()
        if not token:
            continue
        if lineno == 1 and token.lower() in _HEADER_NAMES:
            continue
        try:
            samples.append(int(token))
        except ValueError:
            raise SignalParseError(lineno, token) from None
    if not samples:
        warnings.warn("signal file contains no samples", stacklevel=2)
    return SignalBuffer(np.array(samples, dtype=np.int64), bit_width)


def read_signal_csv(path, bit_width: int = 8) -> SignalBuffer:
    return parse_signal_csv(Path(path).read_text(), bit_width)


def write_signal_csv(signal: SignalBuffer, path) -> None:
    Path(path).write_text("".join(f"{int(v)}\n" for v in signal.samples))


def generate_signal(kind: str, length: int, amplitude: int, seed: int = 0, noise: float = 0.0) -> SignalBuffer:
    """Deterministic test waveform; ``noise`` adds seeded Gaussian jitter."""
    if length < 2:
        raise ValueError("length must be >= 2")
    i = np.arange(length)
    if kind == "constant":
        wave = np.full(length, float(amplitude))
    elif kind == "ramp":
        wave = amplitude * i / (length - 1)
    elif kind == "triangular":
        half = (length - 1) / 2
        wave = amplitude * (1 - np.abs(i - half) / half)
    else:
        raise ValueError(f"unknown signal kind {kind!r}")
    if noise:
        wave = wave + np.random.default_rng(seed).normal(0.0, noise, length)
    bits = max(8, int(amplitude).bit_length())
    return SignalBuffer(np.clip(np.round(wave), 0, (1 << bits) - 1).astype(np.int64), bits)


def generate_image(kind: str = "gradient", width: int = 64, height: int = 64, lo: int = 48, hi: int = 208) -> GrayImage:
    """Synthetic test image: a diagonal ``gradient`` plane or a ``constant`` field."""
    if kind == "constant":
        return GrayImage(np.full((height, width), lo, dtype=np.uint8))
    if kind != "gradient":
        raise ValueError(f"unknown image kind {kind!r}")
    y, x = np.mgrid[0:height, 0:width]
    plane = lo + (hi - lo) * (x + y) / max(width + height - 2, 1)
    return GrayImage(np.round(plane).astype(np.uint8))


@dataclass
class RunManifest:
    command: str
    argv: list
    config: dict
    seed: int | None
    inputs: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    tool_version: str = ""

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> RunManifest:
        return cls(**json.loads(text))

    def write(self, path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def read(cls, path) -> RunManifest:
        return cls.from_json(Path(path).read_text())
