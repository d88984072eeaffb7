import math

import pytest

from roundabouts import IncidentRoadDefinition, Point


def toward_center(x, y, left=1, right=1):
    return IncidentRoadDefinition(Point(x, y), math.atan2(-y, -x), left, right)


@pytest.fixture
def four_way():
    return [toward_center(40, 0), toward_center(0, 40), toward_center(-40, 0), toward_center(0, -40)]


@pytest.fixture
def three_way():
    return [toward_center(40, 0), toward_center(-20, 34.64), toward_center(-20, -34.64)]
