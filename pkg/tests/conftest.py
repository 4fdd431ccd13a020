import numpy as np
import pytest

from pyrseiz import BandSpec, ModelConfig, Window, synthesize_dataset


@pytest.fixture
def tiny_config():
    """Small but structurally complete network for fast tests."""
    return ModelConfig(
        kernel_counts=(4, 3, 2),
        receptive_fields=(5, 3, 3),
        strides=(3, 2, 2),
        fc1_width=5,
        dropout_rate=0.0,
        num_classes=2,
        input_length=64,
    )


@pytest.fixture
def toy_windows():
    """Linearly separable two-class windows: constant +1 vs constant -1."""
    windows = []
    for i in range(24):
        sign = 1.0 if i % 2 == 0 else -1.0
        values = np.full(64, sign)
        windows.append(Window(values=values, label=int(sign < 0), origin=(f"T{i:03d}", 0)))
    return windows


@pytest.fixture(scope="session")
def small_synthetic_records():
    """Three well-separated classes, 6 records each, full 4097-sample length."""
    profiles = [BandSpec(2, 4), BandSpec(8, 12), BandSpec(20, 30)]
    return synthesize_dataset(6, profiles, seed=42)
