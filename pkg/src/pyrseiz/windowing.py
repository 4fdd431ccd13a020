"""Window normalization, training augmentation, and test segmentation."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .dataset import EegRecord, ExperimentCase

WINDOW_SIZE = 512
TEST_INSTANCE_LENGTH = 1024
NORM_EPS = 1e-8


def count_windows(signal_length: int, window: int, stride: int) -> int:
    """Number of windows a window/stride sweep fits into a signal."""
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    if window > signal_length:
        raise ValueError(
            f"window {window} exceeds signal length {signal_length}"
        )
    return (signal_length - window) // stride + 1


def normalize(values: Sequence[float] | np.ndarray) -> np.ndarray:
    """Zero-mean, unit-variance scaling with population std and an eps guard.

    Constant inputs map to all zeros rather than dividing by zero.
    """
    x = np.asarray(values, dtype=np.float64)
    if x.size == 0:
        raise ValueError("cannot normalize an empty sequence")
    std = float(x.std())
    return (x - x.mean()) / max(std, NORM_EPS)


@dataclass(frozen=True)
class SchemeSpec:
    """Window/stride layout of one augmentation scheme.

    Training slides a 512 window at ``train_stride``; testing cuts the signal
    into 1024-sample instances, each split into overlapping expert windows at
    ``test_window_stride``.
    """

    id: int
    train_stride: int
    test_window_stride: int
    window: int = WINDOW_SIZE
    test_instance_length: int = TEST_INSTANCE_LENGTH

    def __post_init__(self) -> None:
        for name in ("train_stride", "test_window_stride", "window", "test_instance_length"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.window > self.test_instance_length:
            raise ValueError("window cannot exceed the test instance length")

    @property
    def ensemble_width(self) -> int:
        """Experts voting per test instance: 3 for scheme 1, 5 for scheme 2."""
        return count_windows(self.test_instance_length, self.window, self.test_window_stride)


SCHEME_1 = SchemeSpec(id=1, train_stride=64, test_window_stride=256)
SCHEME_2 = SchemeSpec(id=2, train_stride=128, test_window_stride=128)
_SCHEMES = {1: SCHEME_1, 2: SCHEME_2}


def get_scheme(scheme_id: int) -> SchemeSpec:
    try:
        return _SCHEMES[int(scheme_id)]
    except (KeyError, TypeError, ValueError):
        raise ValueError(f"unknown scheme {scheme_id!r}; expected 1 or 2") from None


@dataclass(frozen=True)
class Window:
    """One normalized window with its class label and provenance."""

    values: np.ndarray
    label: int
    origin: tuple[str, int]  # (record id, sample offset)

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("window values must be a nonempty 1-D sequence")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class TestInstance:
    """One 1024-sample test sub-signal split into the scheme's expert windows."""

    windows: tuple[Window, ...]
    label: int
    origin: tuple[str, int]  # (record id, sub-signal index)

    def __post_init__(self) -> None:
        if not self.windows:
            raise ValueError("a test instance needs at least one window")
        if any(w.label != self.label for w in self.windows):
            raise ValueError("all windows of an instance must share its label")


def augment_training(
    records: Iterable[EegRecord], case: ExperimentCase, scheme: SchemeSpec
) -> list[Window]:
    """Slide the training window over each record; every window is one instance.

    Windows start at offsets 0, stride, 2*stride, ... and are normalized
    independently with their own statistics. Labels come from the case map.
    """
    out: list[Window] = []
    for record in records:
        if record.set_label not in case.class_of_set:
            raise ValueError(
                f"record {record.record_id} has set {record.set_label}, "
                f"which case {case.name} does not map"
            )
        label = case.class_of_set[record.set_label]
        n = count_windows(len(record), scheme.window, scheme.train_stride)
        for j in range(n):
            offset = j * scheme.train_stride
            values = normalize(record.samples[offset : offset + scheme.window])
            out.append(Window(values=values, label=label, origin=(record.record_id, offset)))
    return out


def segment_signal(samples: np.ndarray, scheme: SchemeSpec) -> list[list[np.ndarray]]:
    """Cut a signal into 1024-sample sub-signals, each into expert windows.

    Sub-signals start at offsets 0, 1024, 2048, ...; trailing samples that do
    not fill a sub-signal are discarded (a 4097-sample record yields 4).
    Every window is normalized independently.
    """
    samples = np.asarray(samples, dtype=np.float64)
    n_sub = samples.size // scheme.test_instance_length
    if n_sub == 0:
        raise ValueError(
            f"signal of {samples.size} samples is shorter than one "
            f"test instance ({scheme.test_instance_length})"
        )
    width = scheme.ensemble_width
    instances = []
    for k in range(n_sub):
        base = k * scheme.test_instance_length
        windows = []
        for j in range(width):
            start = base + j * scheme.test_window_stride
            windows.append(normalize(samples[start : start + scheme.window]))
        instances.append(windows)
    return instances


def segment_testing(
    record: EegRecord, case: ExperimentCase, scheme: SchemeSpec
) -> list[TestInstance]:
    """Two-stage test segmentation of one record into labeled TestInstances."""
    if record.set_label not in case.class_of_set:
        raise ValueError(
            f"record {record.record_id} has set {record.set_label}, "
            f"which case {case.name} does not map"
        )
    label = case.class_of_set[record.set_label]
    instances = []
    for k, raw_windows in enumerate(segment_signal(record.samples, scheme)):
        base = k * scheme.test_instance_length
        windows = tuple(
            Window(
                values=w,
                label=label,
                origin=(record.record_id, base + j * scheme.test_window_stride),
            )
            for j, w in enumerate(raw_windows)
        )
        instances.append(TestInstance(windows=windows, label=label, origin=(record.record_id, k)))
    return instances


def windows_to_arrays(windows: Sequence[Window]) -> tuple[np.ndarray, np.ndarray]:
    """Stack windows into (X, y) arrays for training."""
    if not windows:
        raise ValueError("empty window collection")
    X = np.stack([w.values for w in windows])
    y = np.array([w.label for w in windows], dtype=np.int64)
    return X, y


def dump_windows(windows: Iterable[Window], path: str | Path) -> None:
    """Debug dump: one window per line, comma-separated values."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as fh:
        for window in windows:
            fh.write(",".join(format(v, ".17g") for v in window.values))
            fh.write("\n")
