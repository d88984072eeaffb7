"""Input validation helpers shared by the functional API and the estimators."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .defs import IncidentRoadDefinition
from .errors import DegenerateInputError

MIN_DEFS = 3


def check_points(X, min_points: int = 1) -> np.ndarray:
    """Coerce ``X`` to a finite float array of shape (n, 2)."""
    arr = np.asarray([tuple(p) for p in X] if not isinstance(X, np.ndarray) else X, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"expected points of shape (n, 2), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("points contain NaN or infinite values")
    if len(arr) < min_points:
        raise DegenerateInputError(f"need at least {min_points} points, got {len(arr)}")
    return arr


def check_road_defs(defs, min_defs: int = MIN_DEFS) -> list[IncidentRoadDefinition]:
    """Accept definitions, dicts, or rows ``(x, y, heading, left, right)``."""
    out = []
    for d in defs:
        if isinstance(d, IncidentRoadDefinition):
            out.append(d)
        elif isinstance(d, dict):
            out.append(IncidentRoadDefinition.from_dict(d))
        else:
            row = list(d)
            if len(row) not in (3, 5):
                raise ValueError(f"road definition rows need 3 or 5 values, got {len(row)}")
            x, y, h, *lanes = row
            out.append(IncidentRoadDefinition((x, y), h, *(int(v) for v in lanes)))
    if len(out) < min_defs:
        raise DegenerateInputError(f"a roundabout needs at least {min_defs} incident road definitions, got {len(out)}")
    return out


def check_lane_counts(defs: Sequence[IncidentRoadDefinition]) -> None:
    for i, d in enumerate(defs):
        if d.num_left_lanes + d.num_right_lanes < 1:
            raise ValueError(f"definition {i} has no lanes")
