"""Procedural classic and turbo roundabout generation."""

from .circle_fit import Circle, find_maximal_circle, fit_center_least_squares, roundabout_radius
from .classic import generate_classic
from .defs import GenerationParams, IncidentRoadDefinition, TurboParams
from .errors import (
    DegenerateInputError,
    InfeasibleLayoutError,
    OpenDriveParseError,
    RoundaboutError,
    ValidationFailedError,
)
from .estimators import CircleFitter, ClassicRoundaboutGenerator, TurboRoundaboutGenerator
from .geom import Point, Pose
from .noise import NoiseParams
from .odr.reader import parse_opendrive, read_opendrive
from .odr.validate import validate_links
from .odr.writer import emit_opendrive, write_opendrive
from .turbo import generate_turbo

__all__ = [
    "Circle",
    "CircleFitter",
    "ClassicRoundaboutGenerator",
    "DegenerateInputError",
    "GenerationParams",
    "IncidentRoadDefinition",
    "InfeasibleLayoutError",
    "NoiseParams",
    "OpenDriveParseError",
    "Point",
    "Pose",
    "RoundaboutError",
    "TurboParams",
    "TurboRoundaboutGenerator",
    "ValidationFailedError",
    "emit_opendrive",
    "find_maximal_circle",
    "fit_center_least_squares",
    "generate_classic",
    "generate_turbo",
    "parse_opendrive",
    "read_opendrive",
    "roundabout_radius",
    "validate_links",
    "write_opendrive",
]
