import pytest

from prodisjunct.lrs_core import Recurrence, dominant_decomposition


@pytest.fixture(scope="session")
def rec():
    return Recurrence((6, -13, 10), (2, 4, 7))


@pytest.fixture(scope="session")
def ctx(rec):
    return dominant_decomposition(rec, 256)


@pytest.fixture(scope="session")
def ctx1024(rec):
    return dominant_decomposition(rec, 1024)


@pytest.fixture(scope="session")
def frame(ctx):
    from prodisjunct.interval_engine import select_pattern_frame

    return select_pattern_frame(ctx, 3, 4, (3, 3, 3), deltas=("1.95", "2"))
