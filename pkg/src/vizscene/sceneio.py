"""Scene JSON serialization and reconstruction, plus annotated-SVG export.

Documents are versioned ("msc-scene/1") and self-contained: datasets are
inlined and scopes reference them by row index, so a saved scene works as a
template for repopulation. Serialization is deterministic; reconstruction
validates referential integrity and the structural invariants and reports
failures with a JSON path.
"""

from __future__ import annotations

import json

from .constraints import ConstraintSpec
from .data import AttributeDef, Network, Table
from .elements import (MARK_CHANNELS, DataScope, Group, Mark, Segment, Vertex)
from .encoding import SCALE_KINDS, Encoding, Scale
from .errors import SceneFormatError
from .scene import AuxiliaryElement, PeerSet, Scene, ViewConfig
from .svgrender import render

FORMAT_VERSION = "msc-scene/1"


# ---------------------------------------------------------------- serialize


def _scope_doc(scope: DataScope | None):
    if scope is None:
        return None
    return {"dataset": scope.dataset, "table": scope.table,
            "indices": list(scope.indices)}


def _dataset_doc(name: str, ds) -> dict:
    doc = {"name": name,
           "kind": "network" if isinstance(ds, Network) else "table",
           "attributes": []}
    for a in ds.attributes:
        attr = {"name": a.name, "kind": a.kind}
        if a.declared_order is not None:
            attr["declared_order"] = list(a.declared_order)
        doc["attributes"].append(attr)
    doc["items"] = [dict(row) for row in ds.items]
    if isinstance(ds, Network):
        doc["links"] = [dict(link) for link in ds.links]
        doc["id_attribute"] = ds.id_attribute
    return doc


def _element_doc(el) -> dict:
    if isinstance(el, Mark):
        doc = {"id": el.id, "kind": "mark", "type": el.type,
               "channels": dict(el.channels)}
        if el.vertices:
            doc["vertices"] = [
                {k: v for k, v in (("id", vx.id), ("x", vx.x), ("y", vx.y),
                                   ("scope", _scope_doc(vx.data_scope)),
                                   ("peer_set", vx.peer_set)) if v is not None}
                for vx in el.vertices]
        if el.segments:
            doc["segments"] = [
                {k: v for k, v in (("id", s.id), ("endpoints", list(s.endpoints)),
                                   ("kind", s.kind),
                                   ("channels", s.channels or None)) if v is not None}
                for s in el.segments]
        for key, value in (("scope", _scope_doc(el.data_scope)),
                           ("peer_set", el.peer_set), ("parent", el.parent),
                           ("source_node", el.source_node),
                           ("target_node", el.target_node),
                           ("tree_parent", el.tree_parent)):
            if value is not None:
                doc[key] = value
        if el.z_index:
            doc["z_index"] = el.z_index
        return doc
    doc = {"id": el.id, "kind": el.group_kind, "members": list(el.members),
           "offset": [el.tx, el.ty]}
    if el.channels:
        doc["channels"] = dict(el.channels)
    for key, value in (("scope", _scope_doc(el.data_scope)),
                       ("peer_set", el.peer_set), ("parent", el.parent),
                       ("layout", el.layout), ("provenance", el.provenance)):
        if value is not None:
            doc[key] = value
    if el.layout is not None and el.layout_default:
        doc["layout_default"] = True
    if el.z_index:
        doc["z_index"] = el.z_index
    return doc


def scene_document(scene: Scene) -> dict:
    if scene.dirty.any():
        scene.propagate()
    doc = {
        "version": FORMAT_VERSION,
        "id": scene.id,
        "datasets": [_dataset_doc(n, d) for n, d in scene.datasets.items()],
        "roots": list(scene.roots),
        "elements": [_element_doc(e) for e in scene.elements.values()],
        "peer_sets": [
            {k: v for k, v in (("id", ps.id), ("members", list(ps.members)),
                               ("provenance", ps.provenance)) if v is not None}
            for ps in scene.peer_sets.values()],
        "scales": [_scale_doc(s) for s in scene.scales.values()],
        "encodings": [
            {k: v for k, v in (("id", e.id), ("peer_set", e.peer_set),
                               ("channel", e.channel), ("attribute", e.attribute),
                               ("scale", e.scale), ("aggregator", e.aggregator))
             if v is not None}
            for e in scene.encodings.values()],
        "sync_groups": [{"id": gid, "scales": list(ids)}
                        for gid, ids in scene.sync_groups.items()],
        "constraints": [{"id": c.id, "kind": c.kind, "params": c.params}
                        for c in scene.constraints.values()],
        "aux": [_aux_doc(a) for a in scene.aux],
        "view": _view_doc(scene.view),
    }
    return doc


def _scale_doc(s: Scale) -> dict:
    doc = {"id": s.id, "kind": s.kind, "domain": list(s.domain),
           "range": list(s.range)}
    if s.kind == "power":
        doc["exponent"] = s.exponent
    if s.kind == "log":
        doc["base"] = s.base
    if not s.clamp:
        doc["clamp"] = False
    if s.domain_explicit:
        doc["domain_explicit"] = True
    if s.sync_group is not None:
        doc["sync_group"] = s.sync_group
    return doc


def _aux_doc(a: AuxiliaryElement) -> dict:
    doc = {"id": a.id, "kind": a.aux_kind}
    for key, value in (("channel", a.channel), ("scale", a.scale),
                       ("placement", a.placement), ("offset", a.offset),
                       ("text", a.text)):
        if value is not None:
            doc[key] = value
    if a.aux_kind == "annotation":
        doc["x"] = a.x
        doc["y"] = a.y
        if a.props:
            doc["props"] = a.props
    return doc


def _view_doc(view: ViewConfig) -> dict:
    doc = {"focus": list(view.focus), "zoom": view.zoom, "rotation": view.rotation}
    if view.field_of_view is not None:
        doc["field_of_view"] = list(view.field_of_view)
    return doc


def serialize_scene(scene: Scene) -> str:
    return json.dumps(scene_document(scene), indent=2) + "\n"


# -------------------------------------------------------------- deserialize


def _parse_scope(doc, datasets, path):
    if doc is None:
        return None
    name = doc.get("dataset")
    if name not in datasets:
        raise SceneFormatError(f"scope references unknown dataset {name!r}", path)
    table = doc.get("table", "items")
    ds = datasets[name]
    limit = len(ds.links) if table == "links" else len(ds.items)
    indices = doc.get("indices", [])
    for i in indices:
        if not isinstance(i, int) or i < 0 or i >= limit:
            raise SceneFormatError(f"scope index {i} out of range for {name!r}", path)
    return DataScope(name, tuple(indices), table)


def _parse_dataset(doc, path):
    attributes = [AttributeDef(a["name"], a.get("kind", "nominal"),
                               a.get("declared_order"))
                  for a in doc.get("attributes", [])]
    if doc.get("kind") == "network":
        return Network(doc["name"], attributes, list(doc.get("items", [])),
                       list(doc.get("links", [])), doc.get("id_attribute", "id"))
    return Table(doc["name"], attributes, list(doc.get("items", [])))


def deserialize_scene(source) -> Scene:
    """Rebuild a live scene from a document produced by serialize_scene."""
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    if isinstance(source, str):
        try:
            doc = json.loads(source)
        except json.JSONDecodeError as e:
            raise SceneFormatError(f"not valid JSON: {e}") from e
    else:
        doc = source
    if not isinstance(doc, dict):
        raise SceneFormatError("document must be a JSON object")
    if doc.get("version") != FORMAT_VERSION:
        raise SceneFormatError(
            f"unsupported format version {doc.get('version')!r}; "
            f"expected {FORMAT_VERSION!r}", "version")

    scene = Scene(doc.get("id"))
    seen_ids = [scene.id]
    for i, ds_doc in enumerate(doc.get("datasets", [])):
        scene.datasets[ds_doc["name"]] = _parse_dataset(ds_doc, f"datasets[{i}]")

    for i, el_doc in enumerate(doc.get("elements", [])):
        path = f"elements[{i}]"
        el_id = el_doc.get("id")
        if not el_id or el_id in scene.elements:
            raise SceneFormatError(f"missing or duplicate element id {el_id!r}", path)
        seen_ids.append(el_id)
        if el_doc.get("kind") == "mark":
            el = _parse_mark(scene, el_doc, path, seen_ids)
        elif el_doc.get("kind") in ("glyph", "collection", "composite"):
            el = _parse_group(scene, el_doc, path)
        else:
            raise SceneFormatError(f"unknown element kind {el_doc.get('kind')!r}", path)
        el.parent = el_doc.get("parent")
        el.peer_set = el_doc.get("peer_set")
        el.z_index = el_doc.get("z_index", 0)
        scene.adopt(el)

    # structural wiring
    for i, el in enumerate(scene.elements.values()):
        path = f"elements[{i}]"
        if isinstance(el, Group):
            for m in el.members:
                if m not in scene.elements:
                    raise SceneFormatError(f"member {m!r} does not resolve", path)
                if scene.elements[m].parent != el.id:
                    raise SceneFormatError(
                        f"member {m!r} does not name {el.id!r} as parent", path)
        if el.parent is not None:
            if el.parent not in scene.elements:
                raise SceneFormatError(f"parent {el.parent!r} does not resolve", path)
            if el.id not in scene.elements[el.parent].members:
                raise SceneFormatError(
                    f"{el.id!r} missing from parent {el.parent!r} members", path)
    for i, root in enumerate(doc.get("roots", [])):
        if root not in scene.elements:
            raise SceneFormatError(f"root {root!r} does not resolve", f"roots[{i}]")
        scene.roots.append(root)
    for el in scene.elements.values():
        if el.parent is None and el.id not in scene.roots:
            raise SceneFormatError(f"orphan element {el.id!r} is not a root")
    # every element reachable from the roots exactly once (no membership cycles)
    reached = set()
    stack = list(scene.roots)
    while stack:
        el_id = stack.pop()
        if el_id in reached:
            raise SceneFormatError(f"element {el_id!r} appears twice in the tree")
        reached.add(el_id)
        el = scene.elements[el_id]
        if isinstance(el, Group):
            stack.extend(el.members)
    if len(reached) != len(scene.elements):
        raise SceneFormatError("element tree contains unreachable or cyclic members")

    for i, ps_doc in enumerate(doc.get("peer_sets", [])):
        path = f"peer_sets[{i}]"
        ps = PeerSet(ps_doc["id"], list(ps_doc.get("members", [])),
                     ps_doc.get("provenance"))
        seen_ids.append(ps.id)
        for m in ps.members:
            try:
                scene.resolve(m)
            except Exception:
                raise SceneFormatError(f"peer {m!r} does not resolve", path) from None
        scene.peer_sets[ps.id] = ps

    for i, s_doc in enumerate(doc.get("scales", [])):
        path = f"scales[{i}]"
        if s_doc.get("kind") not in SCALE_KINDS:
            raise SceneFormatError(f"unknown scale kind {s_doc.get('kind')!r}", path)
        scale = Scale(s_doc["id"], s_doc["kind"], list(s_doc.get("domain", [])),
                      list(s_doc.get("range", [])),
                      exponent=s_doc.get("exponent", 0.5),
                      base=s_doc.get("base", 10.0),
                      clamp=s_doc.get("clamp", True),
                      domain_explicit=s_doc.get("domain_explicit", False),
                      sync_group=s_doc.get("sync_group"))
        seen_ids.append(scale.id)
        scene.scales[scale.id] = scale

    for i, e_doc in enumerate(doc.get("encodings", [])):
        path = f"encodings[{i}]"
        if e_doc.get("peer_set") not in scene.peer_sets:
            raise SceneFormatError(
                f"encoding references unknown peer set {e_doc.get('peer_set')!r}", path)
        if e_doc.get("scale") not in scene.scales:
            raise SceneFormatError(
                f"encoding references unknown scale {e_doc.get('scale')!r}", path)
        enc = Encoding(e_doc["id"], e_doc["peer_set"], e_doc["channel"],
                       e_doc["attribute"], e_doc["scale"], e_doc.get("aggregator"))
        seen_ids.append(enc.id)
        scene.encodings[enc.id] = enc
        scene.scales[enc.scale].shared_by.append(enc.id)

    for g_doc in doc.get("sync_groups", []):
        scene.sync_groups[g_doc["id"]] = list(g_doc.get("scales", []))
        seen_ids.append(g_doc["id"])

    for c_doc in doc.get("constraints", []):
        spec = ConstraintSpec(c_doc["id"], c_doc["kind"], dict(c_doc.get("params", {})))
        seen_ids.append(spec.id)
        scene.constraints[spec.id] = spec

    for a_doc in doc.get("aux", []):
        aux = AuxiliaryElement(a_doc["id"], a_doc["kind"],
                               channel=a_doc.get("channel"),
                               scale=a_doc.get("scale"),
                               placement=a_doc.get("placement", "bottom"),
                               offset=a_doc.get("offset", 20.0),
                               text=a_doc.get("text"),
                               x=a_doc.get("x", 0.0), y=a_doc.get("y", 0.0),
                               props=dict(a_doc.get("props", {})))
        if aux.scale is not None and aux.scale not in scene.scales:
            raise SceneFormatError(f"aux references unknown scale {aux.scale!r}")
        seen_ids.append(aux.id)
        scene.aux.append(aux)

    view = doc.get("view", {})
    scene.view = ViewConfig(tuple(view.get("focus", (0.0, 0.0))),
                            view.get("zoom", 1.0), view.get("rotation", 0.0),
                            tuple(view["field_of_view"]) if view.get("field_of_view") else None)
    if scene.view.zoom <= 0:
        raise SceneFormatError("zoom must be positive", "view.zoom")

    _check_invariants(scene)
    scene.bump_counter(seen_ids)
    scene.dirty.clear()
    return scene


def _parse_mark(scene, doc, path, seen_ids) -> Mark:
    mark_type = doc.get("type")
    if mark_type not in MARK_CHANNELS:
        raise SceneFormatError(f"unknown mark type {mark_type!r}", path)
    channels = dict(doc.get("channels", {}))
    for c in channels:
        if c not in MARK_CHANNELS[mark_type]:
            raise SceneFormatError(
                f"channel {c!r} is not valid for mark type {mark_type!r}",
                f"{path}.channels")
    mark = Mark(doc["id"], mark_type, channels,
                source_node=doc.get("source_node"),
                target_node=doc.get("target_node"),
                tree_parent=doc.get("tree_parent"))
    mark.data_scope = _parse_scope(doc.get("scope"), scene.datasets, f"{path}.scope")
    for j, v_doc in enumerate(doc.get("vertices", [])):
        vertex = Vertex(v_doc["id"], v_doc.get("x", 0.0), v_doc.get("y", 0.0),
                        _parse_scope(v_doc.get("scope"), scene.datasets,
                                     f"{path}.vertices[{j}]"),
                        v_doc.get("peer_set"))
        seen_ids.append(vertex.id)
        mark.vertices.append(vertex)
    vertex_ids = {v.id for v in mark.vertices}
    for j, s_doc in enumerate(doc.get("segments", [])):
        endpoints = tuple(s_doc.get("endpoints", ()))
        if len(endpoints) != 2 or any(e not in vertex_ids for e in endpoints):
            raise SceneFormatError("segment endpoints must name the mark's vertices",
                                   f"{path}.segments[{j}]")
        seg = Segment(s_doc["id"], endpoints, s_doc.get("kind", "line"),
                      dict(s_doc.get("channels", {}) or {}))
        seen_ids.append(seg.id)
        mark.segments.append(seg)
    return mark


def _parse_group(scene, doc, path) -> Group:
    group = Group(doc["id"], doc["kind"], members=list(doc.get("members", [])),
                  channels=dict(doc.get("channels", {})),
                  layout=doc.get("layout"),
                  layout_default=doc.get("layout_default", False),
                  provenance=doc.get("provenance"))
    offset = doc.get("offset", [0.0, 0.0])
    group.tx, group.ty = offset[0], offset[1]
    group.data_scope = _parse_scope(doc.get("scope"), scene.datasets, f"{path}.scope")
    if group.layout is not None:
        from .layout import normalize_layout
        try:
            group.layout = normalize_layout(group.layout)
        except Exception as e:
            raise SceneFormatError(str(e), f"{path}.layout") from None
    return group


def _check_invariants(scene: Scene):
    for el in scene.elements.values():
        if not isinstance(el, Group):
            continue
        if el.group_kind == "collection" and el.members:
            problems = scene.check_collection(el)
            if problems:
                raise SceneFormatError(
                    f"collection invariant violated: {problems[0]}",
                    f"elements[{list(scene.elements).index(el.id)}]")
        if el.group_kind == "glyph":
            scopes = {scene.elements[m].data_scope for m in el.members}
            if len(scopes) > 1:
                raise SceneFormatError(
                    "glyph members must share one data scope",
                    f"elements[{list(scene.elements).index(el.id)}]")


# ------------------------------------------------------------------- export


def export_dsvg(scene: Scene, width: int = 640, height: int = 480,
                background: str | None = None) -> str:
    """SVG with data annotations: every mark carries ``data-id``, a ``class``
    naming its type and group path, and ``data-datum`` holding its scope's
    attribute values as JSON."""
    return render(scene, width, height, background, annotate=True)
