"""Boom tip displacement quantification toolkit (C++ core bindings)."""

from ._boomtrack import (
    BoomtrackError,
    Detection,
    MarkerDictionary,
    MarkerObservation,
    __version__,
    angle_to_arc,
    angle_to_arc_paper_compat,
    compose_confidence,
    derive_pixel_pitch,
    detect_markers,
    displacement,
    generate_dictionary,
    iou,
    load_dictionary,
    map_at,
    nms,
    render_marker,
    tip_position,
)

__all__ = [
    "BoomtrackError",
    "Detection",
    "MarkerDictionary",
    "MarkerObservation",
    "__version__",
    "angle_to_arc",
    "angle_to_arc_paper_compat",
    "compose_confidence",
    "derive_pixel_pitch",
    "detect_markers",
    "displacement",
    "generate_dictionary",
    "iou",
    "load_dictionary",
    "map_at",
    "nms",
    "render_marker",
    "tip_position",
]
