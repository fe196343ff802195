"""vizscene: data-visualization scenes as manipulable components.

Scenes hold marks, glyphs, collections and composites bound to data scopes;
generative operations (repeat, divide, densify, classify, repopulate,
stratify) join elements with data, and modificative operations (encodings,
scales, layouts, relational constraints, view configuration) keep the design
consistent through one-way propagation. Scenes render to SVG and round-trip
through a versioned JSON format usable as a chart template.
"""

from .constraints import affix, align, set_order, set_z_order
from .data import (aggregate, export_csv, group_items, import_network,
                   import_table, unique_values)
from .elements import DataScope, Group, Mark, Segment, Vertex
from .encoding import (Encoding, Scale, apply_encoding, band_width,
                       customize_scale, remove_encoding, scale_apply,
                       share_scale, sync_scales)
from .errors import (ChannelError, ConstraintError, DataError, EncodingError,
                     LayoutError, PipelineError, SceneError, SceneFormatError,
                     VizSceneError)
from .generate import (classify, densify, divide, repeat, repeat_network,
                       repopulate, stratify)
from .layout import (apply_layout, apply_layout_peers, compute_grid,
                     compute_packing, compute_spiral, compute_stack,
                     update_layout_param, update_layout_param_peers)
from .pipeline import execute_pipeline, load_pipeline
from .scene import AuxiliaryElement, PeerSet, Scene, ViewConfig, create_scene
from .sceneio import deserialize_scene, export_dsvg, serialize_scene
from .svgrender import render, render_axis, render_legend, render_mark
from .ticks import nice_ticks
from .validate import validate_scene

__version__ = "0.1.0"

__all__ = [
    "AuxiliaryElement", "ChannelError", "ConstraintError", "DataError",
    "DataScope", "Encoding", "EncodingError", "Group", "LayoutError", "Mark",
    "PeerSet", "PipelineError", "Scale", "Scene", "SceneError",
    "SceneFormatError", "Segment", "Vertex", "ViewConfig", "VizSceneError",
    "affix", "aggregate", "align", "apply_encoding", "apply_layout",
    "apply_layout_peers", "band_width", "classify", "compute_grid",
    "compute_packing", "compute_spiral", "compute_stack", "create_scene",
    "customize_scale", "densify", "deserialize_scene", "divide", "export_csv",
    "export_dsvg", "execute_pipeline", "group_items", "import_network",
    "import_table", "load_pipeline", "nice_ticks", "remove_encoding",
    "render", "render_axis", "render_legend", "render_mark", "repeat",
    "repeat_network", "repopulate", "scale_apply", "serialize_scene",
    "set_order", "set_z_order", "share_scale", "stratify", "sync_scales",
    "unique_values", "update_layout_param", "update_layout_param_peers",
    "validate_scene",
]
