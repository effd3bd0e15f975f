import pytest

from fslcg.binpack import BoxType
from fslcg.scenarios import worked_example


@pytest.fixture
def worked():
    return worked_example()


@pytest.fixture
def shared_lane_group():
    """Single USLAX-CNSHA group after pooling A and B: volumes and the two services."""
    volumes = [14, 12, 10, 6, 6, 6, 6]
    boxes = [BoxType(900, 2, 30, "A.sha"), BoxType(1000, 2, 30, "B.sha")]
    return volumes, boxes
