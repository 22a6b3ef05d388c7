"""Sliding-window outlier filtering with the amplitude redistribution step.

The quantum feedback filter slides a window of M samples over a signal, runs
one round of the algorithm per window with the previous output as the
reference value, and emits the selected original sample.  A median filter
with identical window geometry serves as the baseline.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from qara.engine import encode_window, pick_index, rotation_count, window_distribution

REFERENCE_POLICIES = ("feedback", "window_mean")
MODES = ("argmax", "sampled")
DEFAULT_OUTLIER_THRESHOLD = 64


@dataclass(frozen=True)
class FilterConfig:
    window_M: int = 8
    bit_width_n: int = 8
    mode: str = "argmax"
    seed: int | None = None
    normalize: bool = True
    stride: int = 1
    edge_policy: str = "replicate"
    reference_policy: str = "feedback"
    unique_mode: bool = True

    def __post_init__(self):
        M = self.window_M
        if not (2 <= M <= 1024) or M & (M - 1):
            raise ValueError(f"window size must be a power of two in [2, 1024], got {M}")
        if self.stride < 1:
            raise ValueError("stride must be >= 1")
        if self.bit_width_n < 1:
            raise ValueError("bit width must be >= 1")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.mode == "sampled" and self.seed is None:
            raise ValueError("sampled mode needs a seed")
        if self.edge_policy != "replicate":
            raise ValueError("only the 'replicate' edge policy is supported")
        if self.reference_policy not in REFERENCE_POLICIES:
            raise ValueError(f"reference policy must be one of {REFERENCE_POLICIES}")


@dataclass(frozen=True)
class SignalBuffer:
    samples: np.ndarray
    bit_width: int = 8

    def __post_init__(self):
        s = np.array(self.samples, dtype=np.int64).reshape(-1)
        if s.size and (s.min() < 0 or s.max() >= 1 << self.bit_width):
            raise ValueError(f"samples must lie in [0, {(1 << self.bit_width) - 1}]")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    def __len__(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class GrayImage:
    """8-bit grayscale image stored as a (height, width) uint8 array."""

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim != 2:
            raise ValueError("pixels must be a 2-D (height, width) array")
        if arr.size and (arr.min() < 0 or arr.max() > 255):
            raise ValueError("pixel values must be in 0..255")
        arr = arr.astype(np.uint8)
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @classmethod
    def from_rows(cls, width: int, height: int, data: Sequence[int]) -> GrayImage:
        if len(data) != width * height:
            raise ValueError("pixel count does not match width*height")
        return cls(np.asarray(data).reshape(height, width))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class QualityReport:
    mse: float
    psnr: float
    max_abs_error: int
    residual_outlier_count: int
    threshold: int = DEFAULT_OUTLIER_THRESHOLD

    def to_json(self) -> dict:
        return {
            "mse": self.mse,
            "psnr": "inf" if math.isinf(self.psnr) else self.psnr,
            "max_abs_error": self.max_abs_error,
            "residual_outlier_count": self.residual_outlier_count,
            "threshold": self.threshold,
        }


@dataclass(frozen=True)
class WindowScaling:
    """Affine window normalization; keeps the originals so results map back exactly."""

    lo: int
    hi: int
    originals: tuple
    degenerate: bool

    def original(self, index: int) -> int:
        return self.originals[index]


@dataclass(frozen=True)
class WindowTrace:
    window_ordinal: int
    reference: int
    chosen_index: int
    chosen_value: int


@dataclass
class FilterRun:
    config: FilterConfig | None
    output: SignalBuffer
    trace: list = field(default_factory=list)
    quantum_rotations: int = 0
    comparisons: int = 0

    @property
    def windows(self) -> int:
        return len(self.trace)

    def trace_rows(self) -> list:
        return [(t.window_ordinal, t.reference, t.chosen_index, t.chosen_value) for t in self.trace]


def normalize_window(values: Sequence[int], reference: int, n: int):
    """Stretch the window to the full n-bit range.

    v -> round((v - lo) * (2^n - 1) / (hi - lo)), halves rounded up; the
    reference is mapped the same way and clamped.  Returns
    ``(scaled_values, scaled_reference, WindowScaling)``.
    """
    if n < 1:
        raise ValueError("bit width must be >= 1")
    values = tuple(int(v) for v in values)
    lo, hi = min(values), max(values)
    top = (1 << n) - 1
    if hi == lo:
        return [0] * len(values), 0, WindowScaling(lo, hi, values, True)
    span = hi - lo

    def scale(v: int) -> int:
        return (2 * (v - lo) * top + span) // (2 * span)

    scaled_ref = min(max(scale(int(reference)), 0), top)
    return [scale(v) for v in values], scaled_ref, WindowScaling(lo, hi, values, False)


def window_seed(global_seed: int, row: int, ordinal: int) -> int:
    """Per-window RNG seed derived from (global seed, row, window ordinal)."""
    return int(np.random.SeedSequence([int(global_seed), int(row), int(ordinal)]).generate_state(1)[0])


def sliding_windows(samples: np.ndarray, M: int, stride: int = 1) -> np.ndarray:
    """Windows centred on every ``stride``-th sample, edges replicated.

    The window for position t covers samples t - M/2 .. t + M/2 - 1.
    """
    samples = np.asarray(samples)
    if len(samples) < M:
        raise ValueError(f"signal of length {len(samples)} is shorter than the window ({M})")
    padded = np.pad(samples, (M // 2, M - M // 2 - 1), mode="edge")
    return np.lib.stride_tricks.sliding_window_view(padded, M)[::stride]


def _window_mean(window) -> int:
    return int(sum(int(v) for v in window) // len(window))


def quantum_feedback_filter(signal: SignalBuffer, cfg: FilterConfig, row: int = 0) -> FilterRun:
    """Filter ``signal`` one window at a time, feeding each output back as the next reference.

    The first window (and every window under ``reference_policy="window_mean"``)
    uses the integer mean of the window as reference.  ``row`` only feeds
    the per-window seed derivation.
    """
    n = cfg.bit_width_n
    if not cfg.normalize and signal.bit_width > n:
        raise ValueError(f"{signal.bit_width}-bit samples need normalization to fit {n} bits")
    out = []
    trace = []
    reference = None
    for ordinal, window in enumerate(sliding_windows(signal.samples, cfg.window_M, cfg.stride)):
        raw = [int(v) for v in window]
        if reference is None or cfg.reference_policy == "window_mean":
            reference = _window_mean(raw)
        if cfg.normalize:
            scaled, scaled_ref, _ = normalize_window(raw, reference, n)
        else:
            scaled, scaled_ref = raw, reference
        dist = window_distribution(encode_window(scaled, scaled_ref, n, cfg.unique_mode))
        seed = window_seed(cfg.seed, row, ordinal) if cfg.mode == "sampled" else None
        idx = pick_index(dist, cfg.mode, seed)
        trace.append(WindowTrace(ordinal, reference, idx, raw[idx]))
        reference = raw[idx]
        out.append(reference)
    return FilterRun(
        cfg,
        SignalBuffer(np.array(out, dtype=np.int64), signal.bit_width),
        trace,
        quantum_rotations=rotation_count(n) * len(trace),
    )


def _merge_sort(values: list, counter: list) -> list:
    if len(values) <= 1:
        return values
    mid = len(values) // 2
    left, right = _merge_sort(values[:mid], counter), _merge_sort(values[mid:], counter)
    merged = []
    i = j = 0
    while i < len(left) and j < len(right):
        counter[0] += 1
        if left[i] <= right[j]:
            merged.append(left[i])
            i += 1
        else:
            merged.append(right[j])
            j += 1
    return merged + left[i:] + right[j:]


def window_median(values: Sequence[int]) -> tuple[int, int]:
    """Lower median of ``values`` and the number of comparisons spent sorting."""
    counter = [0]
    ordered = _merge_sort([int(v) for v in values], counter)
    return ordered[(len(ordered) - 1) // 2], counter[0]


def median_filter(
    signal: SignalBuffer, window_M: int, stride: int = 1, edge_policy: str = "replicate"
) -> FilterRun:
    """Sliding median with the same geometry as the quantum filter.

    For even windows the lower of the two central order statistics is
    returned, so every output is a member of its window.
    """
    if edge_policy != "replicate":
        raise ValueError("only the 'replicate' edge policy is supported")
    if window_M < 1:
        raise ValueError("window must be positive")
    out = []
    trace = []
    comparisons = 0
    for ordinal, window in enumerate(sliding_windows(signal.samples, window_M, stride)):
        med, cost = window_median(window)
        comparisons += cost
        trace.append(WindowTrace(ordinal, med, int(np.flatnonzero(window == med)[0]), med))
        out.append(med)
    return FilterRun(
        None, SignalBuffer(np.array(out, dtype=np.int64), signal.bit_width), trace, comparisons=comparisons
    )


def filter_image_rows(img: GrayImage, cfg: FilterConfig, algorithm: str = "qara") -> list:
    """Filter every row independently; returns one FilterRun per row."""
    if img.width < cfg.window_M:
        raise ValueError(f"image width {img.width} is narrower than the window ({cfg.window_M})")
    runs = []
    for row, pixels in enumerate(img.pixels):
        sig = SignalBuffer(pixels.astype(np.int64), 8)
        if algorithm == "qara":
            runs.append(quantum_feedback_filter(sig, cfg, row=row))
        elif algorithm == "median":
            runs.append(median_filter(sig, cfg.window_M, cfg.stride, cfg.edge_policy))
        else:
            raise ValueError(f"unknown algorithm {algorithm!r}")
    return runs


def filter_image(img: GrayImage, cfg: FilterConfig, algorithm: str = "qara") -> GrayImage:
    runs = filter_image_rows(img, cfg, algorithm)
    return GrayImage(np.stack([r.output.samples for r in runs]).astype(np.uint8))


def _as_array(x) -> np.ndarray:
    if isinstance(x, GrayImage):
        return x.pixels.astype(np.int64)
    if isinstance(x, SignalBuffer):
        return x.samples
    return np.asarray(x, dtype=np.int64)


def compute_quality(clean, filtered, threshold: int = DEFAULT_OUTLIER_THRESHOLD) -> QualityReport:
    a, b = _as_array(clean), _as_array(filtered)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    diff = np.abs(a - b)
    mse = float(np.mean(diff.astype(np.float64) ** 2)) if diff.size else 0.0
    psnr = math.inf if mse == 0 else 10.0 * math.log10(255.0**2 / mse)
    return QualityReport(
        mse=mse,
        psnr=psnr,
        max_abs_error=int(diff.max()) if diff.size else 0,
        residual_outlier_count=int(np.count_nonzero(diff > threshold)),
        threshold=threshold,
    )


@dataclass(frozen=True)
class ArtifactSpec:
    count: int
    magnitude: int = 255
    shape: str = "impulse"
    seed: int = 0
    size: int = 8


def inject_artifacts(clean, spec: ArtifactSpec):
    """Overwrite ``spec.count`` impulses or size x size blocks with ``spec.magnitude``.

    Returns ``(corrupted, mask)`` with the same container type as ``clean``.
    Blocks on a signal are runs of ``size`` samples.
    """
    data = _as_array(clean).copy()
    bits = clean.bit_width if isinstance(clean, SignalBuffer) else 8
    if not 0 <= spec.magnitude < 1 << bits:
        raise ValueError(f"magnitude {spec.magnitude} does not fit {bits} bits")
    rng = np.random.default_rng(spec.seed)
    mask = np.zeros(data.shape, dtype=bool)
    if spec.shape == "impulse":
        flat = rng.choice(data.size, size=spec.count, replace=False) if spec.count else []
        mask.reshape(-1)[flat] = True
    elif spec.shape == "block":
        for _ in range(spec.count):
            corner = [int(rng.integers(0, dim - spec.size + 1)) for dim in data.shape]
            mask[tuple(slice(c, c + spec.size) for c in corner)] = True
    else:
        raise ValueError(f"unknown artifact shape {spec.shape!r}")
    data[mask] = spec.magnitude
    if isinstance(clean, GrayImage):
        return GrayImage(data.astype(np.uint8)), mask
    return SignalBuffer(data, bits), mask
