import numpy as np
import pytest

from featcodec.containers import FAMILY_PATTERN, TaskKind, make_feature
from featcodec.preprocess import TruncationRegion, quantize_uniform

ALL_TASKS = list(TaskKind)

FIXTURE_DIR = __file__.rsplit("/", 1)[0] + "/fixtures"


def random_shape(task: TaskKind, rng: np.random.Generator, hi: int = 6):
    """A small random shape inside the task's family."""
    return tuple(
        fixed if fixed is not None else int(rng.integers(1, hi + 1))
        for fixed in FAMILY_PATTERN[task]
    )


def random_feature(task, rng, lo=-8.0, hi=8.0, shape=None):
    shape = shape or random_shape(task, rng)
    data = rng.uniform(lo, hi, size=shape).astype(np.float32)
    return make_feature(task, data, source_id=f"test:{task.name}")


def random_quantized(task, rng, bits=10, shape=None):
    t = random_feature(task, rng, shape=shape)
    regions = (TruncationRegion(-8.0, 8.0),) * len(t.splits)
    return quantize_uniform(t, regions, bits=bits)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
