import numpy as np
import pytest

from chronicle.series import Chronicle


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def defined(x):
    """Non-MISSING samples of a chronicle or array."""
    v = x.values if isinstance(x, Chronicle) else np.asarray(x)
    return v[~np.isnan(v)]
