import itertools

import pytest

from tcamsplit.partition import Partition


def compositions(width, k):
    """Every ordered partition of 2^width into k non-negative parts."""
    total = 1 << width
    for cuts in itertools.combinations_with_replacement(range(total + 1), k - 1):
        bounds = (0,) + cuts + (total,)
        yield Partition(tuple(b - a for a, b in zip(bounds, bounds[1:])), width)


def five_target_split():
    return Partition((4, 1, 1, 1, 1), 3)


@pytest.fixture
def five_targets():
    return five_target_split()
