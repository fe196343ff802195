"""Visual elements: marks with vertices/segments, groups, and data scopes.

Coordinates are y-down (SVG convention). Angles are in degrees, 0 pointing up,
clockwise positive. Vertex coordinates are local to their mark; a mark's
``x``/``y`` channels anchor it in its parent's frame, and group offsets
translate whole subtrees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ChannelError, SceneError

MARK_TYPES = ("rectangle", "circle", "line", "path", "text", "image", "band",
              "area", "ring", "pie", "polyline", "arc", "polygon", "geoPolygon")

GROUP_KINDS = ("glyph", "collection", "composite")

# channel inventory per mark type; this table is the package's documented
# contract for which channels each type accepts
MARK_CHANNELS = {
    "rectangle": ("x", "y", "width", "height", "fill", "stroke", "stroke_width", "opacity"),
    "image": ("x", "y", "width", "height", "href", "opacity"),
    "band": ("x", "y", "width", "height", "fill", "stroke", "stroke_width", "opacity"),
    "area": ("x", "y", "width", "height", "fill", "stroke", "stroke_width", "opacity"),
    "circle": ("x", "y", "radius", "fill", "stroke", "stroke_width", "opacity"),
    "pie": ("x", "y", "radius", "start_angle", "angle", "fill", "stroke", "stroke_width", "opacity"),
    "ring": ("x", "y", "inner_radius", "outer_radius", "fill", "stroke", "stroke_width", "opacity"),
    "arc": ("x", "y", "inner_radius", "outer_radius", "start_angle", "angle",
            "fill", "stroke", "stroke_width", "opacity"),
    "line": ("x", "y", "x2", "y2", "stroke", "stroke_width", "opacity"),
    "polyline": ("x", "y", "stroke", "stroke_width", "opacity"),
    "path": ("x", "y", "fill", "stroke", "stroke_width", "opacity"),
    "polygon": ("x", "y", "fill", "stroke", "stroke_width", "opacity"),
    "geoPolygon": ("x", "y", "fill", "stroke", "stroke_width", "opacity"),
    "text": ("x", "y", "text", "font_size", "fill", "opacity"),
}

GROUP_CHANNELS = ("x", "y", "width", "height")

# smart defaults: visible at identity zoom without any encodings applied
MARK_DEFAULTS = {
    "rectangle": {"x": 0, "y": 0, "width": 30, "height": 30, "fill": "#888", "opacity": 1},
    "image": {"x": 0, "y": 0, "width": 30, "height": 30, "href": "", "opacity": 1},
    "band": {"x": 0, "y": 0, "width": 30, "height": 30, "fill": "#888", "opacity": 1},
    "area": {"x": 0, "y": 0, "width": 30, "height": 30, "fill": "#888", "opacity": 1},
    "circle": {"x": 0, "y": 0, "radius": 15, "fill": "#888", "opacity": 1},
    "pie": {"x": 0, "y": 0, "radius": 15, "start_angle": 0, "angle": 360, "fill": "#888", "opacity": 1},
    "ring": {"x": 0, "y": 0, "inner_radius": 7.5, "outer_radius": 15, "fill": "#888", "opacity": 1},
    "arc": {"x": 0, "y": 0, "inner_radius": 7.5, "outer_radius": 15, "start_angle": 0,
            "angle": 360, "fill": "#888", "opacity": 1},
    "line": {"x": 0, "y": 0, "x2": 40, "y2": 0, "stroke": "#888", "stroke_width": 1, "opacity": 1},
    "polyline": {"x": 0, "y": 0, "stroke": "#888", "stroke_width": 1, "opacity": 1},
    "path": {"x": 0, "y": 0, "stroke": "#888", "stroke_width": 1, "opacity": 1},
    "polygon": {"x": 0, "y": 0, "fill": "#888", "opacity": 1},
    "geoPolygon": {"x": 0, "y": 0, "fill": "#888", "opacity": 1},
    "text": {"x": 0, "y": 0, "text": "", "font_size": 12, "fill": "#888", "opacity": 1},
}

# channels that feed layout computations (extents), as opposed to positions
SIZE_CHANNELS = ("width", "height", "radius", "inner_radius", "outer_radius",
                 "angle", "start_angle", "font_size", "text", "x2", "y2")

POSITION_CHANNELS = ("x", "y")

# per-glyph width factor used to approximate text extent without font metrics
TEXT_WIDTH_FACTOR = 0.6


@dataclass(frozen=True)
class DataScope:
    """The data items a visual element represents."""

    dataset: str
    indices: tuple = ()
    table: str = "items"  # "items" for rows/nodes, "links" for network links

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(sorted(self.indices)))

    def union(self, other: "DataScope") -> "DataScope":
        if other.dataset != self.dataset or other.table != self.table:
            raise SceneError("cannot union data scopes over different datasets")
        return DataScope(self.dataset, tuple(set(self.indices) | set(other.indices)), self.table)

    def intersection(self, indices) -> "DataScope":
        return DataScope(self.dataset, tuple(set(self.indices) & set(indices)), self.table)

    def overlaps(self, other: "DataScope") -> bool:
        if other.dataset != self.dataset or other.table != self.table:
            return False
        return bool(set(self.indices) & set(other.indices))

    def __len__(self):
        return len(self.indices)


@dataclass
class Vertex:
    id: str
    x: float = 0.0
    y: float = 0.0
    data_scope: DataScope | None = None
    peer_set: str | None = None


@dataclass
class Segment:
    id: str
    endpoints: tuple  # (vertex id, vertex id)
    kind: str = "line"  # or "curve"
    channels: dict = field(default_factory=dict)
    data_scope: DataScope | None = None


@dataclass
class Mark:
    id: str
    type: str
    channels: dict = field(default_factory=dict)
    vertices: list = field(default_factory=list)
    segments: list = field(default_factory=list)
    data_scope: DataScope | None = None
    peer_set: str | None = None
    parent: str | None = None
    z_index: int = 0
    # node-link wiring: ids of the node elements a link mark connects
    source_node: str | None = None
    target_node: str | None = None
    tree_parent: str | None = None

    @property
    def kind(self):
        return "mark"

    def vertex(self, vertex_id: str) -> Vertex:
        for v in self.vertices:
            if v.id == vertex_id:
                return v
        raise SceneError(f"mark {self.id} has no vertex {vertex_id}")


@dataclass
class Group:
    id: str
    group_kind: str  # glyph | collection | composite
    members: list = field(default_factory=list)  # ordered element ids
    channels: dict = field(default_factory=dict)  # optional declared width/height
    tx: float = 0.0  # translation applied to the whole subtree
    ty: float = 0.0
    data_scope: DataScope | None = None
    peer_set: str | None = None
    parent: str | None = None
    z_index: int = 0
    layout: dict | None = None  # {"type": ..., params...}
    layout_default: bool = False  # attached by a generative op, yields to affix
    provenance: dict | None = None  # generative origin, drives repopulate

    @property
    def kind(self):
        return self.group_kind


def valid_channels(mark_type: str):
    try:
        return MARK_CHANNELS[mark_type]
    except KeyError:
        raise SceneError(f"unknown mark type {mark_type!r}") from None


def check_channel(mark_type: str, channel: str):
    if channel not in valid_channels(mark_type):
        raise ChannelError(f"channel {channel!r} is not valid for mark type {mark_type!r}")


def sync_geometry(mark: Mark, make_id):
    """Keep derived vertex/segment lists consistent with the mark's channels.

    Rectangles and bands carry their four corners; lines carry both endpoints.
    Vertex ids are allocated once and reused on later size changes.
    """
    if mark.type in ("rectangle", "band"):
        w = mark.channels.get("width", 0)
        h = mark.channels.get("height", 0)
        corners = [(0, 0), (w, 0), (w, h), (0, h)]
        _sync_ring(mark, corners, make_id, close=True)
    elif mark.type == "line":
        dx = mark.channels.get("x2", 0) - mark.channels.get("x", 0)
        dy = mark.channels.get("y2", 0) - mark.channels.get("y", 0)
        _sync_ring(mark, [(0, 0), (dx, dy)], make_id, close=False)


def _sync_ring(mark: Mark, points, make_id, close: bool):
    while len(mark.vertices) < len(points):
        mark.vertices.append(Vertex(make_id("vertex")))
    del mark.vertices[len(points):]
    for v, (px, py) in zip(mark.vertices, points):
        v.x, v.y = px, py
    n_segments = len(points) if close else len(points) - 1
    while len(mark.segments) < n_segments:
        mark.segments.append(Segment(make_id("segment"), ("", "")))
    del mark.segments[n_segments:]
    for i, seg in enumerate(mark.segments):
        seg.endpoints = (mark.vertices[i].id, mark.vertices[(i + 1) % len(points)].id)
        seg.kind = "line"


def mark_bbox(mark: Mark):
    """Bounding box in the mark's parent frame: (left, top, right, bottom)."""
    ch = mark.channels
    x, y = ch.get("x", 0), ch.get("y", 0)
    t = mark.type
    if t in ("rectangle", "image", "band", "area"):
        if t == "area" and mark.vertices:
            return _vertex_bbox(mark, x, y)
        return (x, y, x + ch.get("width", 0), y + ch.get("height", 0))
    if t == "circle":
        r = ch.get("radius", 0)
        return (x - r, y - r, x + r, y + r)
    if t in ("pie",):
        r = ch.get("radius", 0)
        return (x - r, y - r, x + r, y + r)
    if t in ("ring", "arc"):
        r = ch.get("outer_radius", 0)
        return (x - r, y - r, x + r, y + r)
    if t == "line":
        x2, y2 = ch.get("x2", 0), ch.get("y2", 0)
        return (min(x, x2), min(y, y2), max(x, x2), max(y, y2))
    if t == "text":
        half_w = TEXT_WIDTH_FACTOR * ch.get("font_size", 12) * len(str(ch.get("text", ""))) / 2
        half_h = ch.get("font_size", 12) / 2
        return (x - half_w, y - half_h, x + half_w, y + half_h)
    return _vertex_bbox(mark, x, y)


def _vertex_bbox(mark: Mark, x, y):
    if not mark.vertices:
        return (x, y, x, y)
    xs = [v.x for v in mark.vertices]
    ys = [v.y for v in mark.vertices]
    return (x + min(xs), y + min(ys), x + max(xs), y + max(ys))


def translate_mark(mark: Mark, dx: float, dy: float):
    mark.channels["x"] = mark.channels.get("x", 0) + dx
    mark.channels["y"] = mark.channels.get("y", 0) + dy
    if mark.type == "line":
        mark.channels["x2"] = mark.channels.get("x2", 0) + dx
        mark.channels["y2"] = mark.channels.get("y2", 0) + dy


def arc_point(cx: float, cy: float, r: float, angle_deg: float):
    """Point on a circle at the given angle; 0 degrees up, clockwise positive."""
    a = math.radians(angle_deg)
    return (cx + r * math.sin(a), cy - r * math.cos(a))
