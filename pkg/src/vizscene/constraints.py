"""Relational constraints: alignment, affixation, ordering and z-order.

Constraints only ever translate elements; sizes are untouched. When a
target's position along the constrained axis is computed by a layout, the
constraint translates the nearest enclosing group that is still free on that
axis, so e.g. right-aligning bars inside horizontal stacks shifts whole rows.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .data import canonical_order
from .elements import Group, Mark
from .errors import ConstraintError

EDGES = ("left", "right", "top", "bottom", "center_x", "center_y")

ANCHOR_POINTS = {
    "nw": (0.0, 0.0), "n": (0.5, 0.0), "ne": (1.0, 0.0),
    "w": (0.0, 0.5), "center": (0.5, 0.5), "e": (1.0, 0.5),
    "sw": (0.0, 1.0), "s": (0.5, 1.0), "se": (1.0, 1.0),
}

TOLERANCE = 1e-9


@dataclass
class ConstraintSpec:
    id: str
    kind: str  # align | affix | order | z_order
    params: dict = field(default_factory=dict)


def edge_axis(edge: str) -> str:
    return "x" if edge in ("left", "right", "center_x") else "y"


def edge_value(box, edge: str) -> float:
    l, t, r, b = box
    return {"left": l, "right": r, "top": t, "bottom": b,
            "center_x": (l + r) / 2, "center_y": (t + b) / 2}[edge]


def bbox_point(box, anchor: str):
    l, t, r, b = box
    fx, fy = ANCHOR_POINTS[anchor]
    return (l + fx * (r - l), t + fy * (b - t))


def movable_unit(scene, el, axis: str):
    """Climb to the first element whose position on the axis is not computed
    by an enclosing layout; translating it moves the original rigidly."""
    from .layout import owns_axis
    cur = el
    while cur.parent not in (None, "__detached__"):
        parent = scene.elements[cur.parent]
        if isinstance(parent, Group) and parent.layout and owns_axis(parent.layout, axis):
            cur = parent
            continue
        return cur
    return cur


def resolve_selection(scene, selection) -> list:
    """Element list from ids, objects, or a stored declarative filter."""
    if isinstance(selection, dict):
        if "peer_set" in selection:
            ps = scene.peer_sets.get(selection["peer_set"])
            out = [scene.resolve(m) for m in (ps.members if ps else [])
                   if _known(scene, m)]
        else:
            out = []
            for root in resolve_selection(scene, selection["from"]):
                out.extend(scene.descendant_marks(root) or [root])
        where = selection.get("where")
        if where:
            out = [e for e in out
                   if e.data_scope is not None
                   and scene.get_scope_value(e, where["attribute"]) == where["value"]]
        return out
    if isinstance(selection, (list, tuple)):
        flat = []
        for item in selection:
            flat.extend(resolve_selection(scene, item))
        return flat
    el = scene.resolve(selection)
    return [el]


def _known(scene, el_id: str) -> bool:
    try:
        scene.resolve(el_id)
        return True
    except Exception:
        return False


def _expand_pairing_units(scene, elements):
    """Collections flatten to their pairing units (marks/glyphs); marks and
    glyphs pass through."""
    units = []
    for el in elements:
        if isinstance(el, Mark) or el.group_kind == "glyph":
            units.append(el)
        else:
            stack = [scene.elements[m] for m in el.members]
            while stack:
                e = stack.pop(0)
                if isinstance(e, Mark) or e.group_kind == "glyph":
                    units.append(e)
                else:
                    stack = [scene.elements[m] for m in e.members] + stack
    return units


def _store_selection(scene, elements, original):
    """Prefer the declarative form (survives repopulate) over raw id lists."""
    if isinstance(original, dict):
        return original
    peer_sets = {e.peer_set for e in elements}
    if len(peer_sets) == 1 and None not in peer_sets:
        ps = peer_sets.pop()
        if set(scene.peer_sets[ps].members) == {e.id for e in elements}:
            return {"peer_set": ps}
    return [e.id for e in elements]


# -------------------------------------------------------------------- align


def position_claims(scene, axis: str) -> set:
    """Element ids whose position on the axis is written by a constraint."""
    claimed = set()
    for spec in scene.constraints.values():
        if spec.kind == "align" and edge_axis(spec.params["edge"]) == axis:
            for el in resolve_selection(scene, spec.params["targets"]):
                claimed.add(movable_unit(scene, el, axis).id)
        elif spec.kind == "affix":
            for el in _expand_pairing_units(
                    scene, resolve_selection(scene, spec.params["followers"])):
                claimed.add(el.id)
    return claimed


def _reject_encoded_positions(scene, units, axis):
    for unit in units:
        enc = scene.channel_owner_encoding(unit, axis)
        if enc is not None:
            raise ConstraintError(
                f"{unit.id}.{axis} is bound by encoding {enc.id}; "
                f"remove the encoding before constraining it")


def align(scene, targets, edge: str) -> ConstraintSpec:
    if edge not in EDGES:
        raise ConstraintError(f"unknown alignment edge {edge!r}")
    elements = resolve_selection(scene, targets)
    if not elements:
        raise ConstraintError("alignment needs at least one target")
    axis = edge_axis(edge)
    units = [movable_unit(scene, el, axis) for el in elements]
    if len({u.id for u in units}) < len({e.id for e in elements}):
        raise ConstraintError(
            "alignment targets collapse onto one movable element; "
            "their positions on this axis are fully determined already")
    _check_alignment_conflicts(scene, units, axis)
    _reject_encoded_positions(scene, units, axis)
    spec = ConstraintSpec(scene.make_id("con"), "align", {
        "targets": _store_selection(scene, elements, targets),
        "edge": edge,
    })
    scene.constraints[spec.id] = spec
    scene.dirty.constraints.add(spec.id)
    scene.maybe_propagate()
    return spec


def _check_alignment_conflicts(scene, units, axis):
    unit_ids = {u.id for u in units}
    for other in scene.constraints.values():
        if other.kind != "align" or edge_axis(other.params["edge"]) != axis:
            continue
        existing = resolve_selection(scene, other.params["targets"])
        other_units = {movable_unit(scene, e, axis).id for e in existing}
        if unit_ids & other_units:
            raise ConstraintError(
                f"axis {axis!r} of {sorted(unit_ids & other_units)} is already "
                f"driven by alignment {other.id}")


def evaluate_align(scene, spec: ConstraintSpec):
    elements = resolve_selection(scene, spec.params["targets"])
    if len(elements) < 2:
        return set(), None
    edge = spec.params["edge"]
    axis = edge_axis(edge)
    values = [edge_value(scene.bbox(el), edge) for el in elements]
    if edge in ("left", "top"):
        ref = min(values)
    elif edge in ("right", "bottom"):
        ref = max(values)
    else:
        ref = sum(values) / len(values)
    deltas = {}
    for el, value in zip(elements, values):
        unit = movable_unit(scene, el, axis)
        want = ref - value
        if unit.id in deltas and abs(deltas[unit.id] - want) > TOLERANCE:
            return set(), f"alignment {spec.id} needs two translations of {unit.id}"
        deltas[unit.id] = want
    moved = set()
    for unit_id, delta in deltas.items():
        if abs(delta) > TOLERANCE:
            unit = scene.elements[unit_id]
            scene.translate(unit, delta if axis == "x" else 0,
                            delta if axis == "y" else 0, touch=False)
            moved.add(unit_id)
    return moved, None


# -------------------------------------------------------------------- affix


def affix(scene, followers, anchors, anchor_point: str = "center",
          dx: float = 0.0, dy: float = 0.0) -> ConstraintSpec:
    if anchor_point not in ANCHOR_POINTS:
        raise ConstraintError(f"unknown anchor point {anchor_point!r}")
    follower_units = _expand_pairing_units(scene, resolve_selection(scene, followers))
    anchor_units = _expand_pairing_units(scene, resolve_selection(scene, anchors))
    _pair(scene, follower_units, anchor_units)  # validates now
    _release_followers(scene, follower_units)
    _reject_encoded_positions(scene, follower_units, "x")
    _reject_encoded_positions(scene, follower_units, "y")
    spec = ConstraintSpec(scene.make_id("con"), "affix", {
        "followers": _store_selection(scene, follower_units, followers),
        "anchors": _store_selection(scene, anchor_units, anchors),
        "anchor_point": anchor_point,
        "dx": dx,
        "dy": dy,
    })
    scene.constraints[spec.id] = spec
    scene.dirty.constraints.add(spec.id)
    scene.maybe_propagate()
    return spec


def _release_followers(scene, follower_units):
    """Followers become constraint-positioned; auto-attached layouts on their
    groups step aside, explicit ones are a hard conflict."""
    for f in follower_units:
        if f.parent in (None, "__detached__"):
            continue
        parent = scene.elements[f.parent]
        if not isinstance(parent, Group) or parent.layout is None:
            continue
        from .layout import owns_axis
        if owns_axis(parent.layout, "x") or owns_axis(parent.layout, "y"):
            if parent.layout_default:
                parent.layout = None
                parent.layout_default = False
            else:
                raise ConstraintError(
                    f"cannot affix {f.id}: its position is owned by the "
                    f"{parent.layout['type']} layout on {parent.id}")


def _pair(scene, follower_units, anchor_units):
    if len(follower_units) == 1 and len(anchor_units) == 1 and (
            follower_units[0].data_scope is None or anchor_units[0].data_scope is None):
        return [(follower_units[0], anchor_units[0])]
    by_scope = {}
    for a in anchor_units:
        if a.data_scope is None:
            raise ConstraintError(f"affix anchor {a.id} has no data scope to pair by")
        key = (a.data_scope.dataset, a.data_scope.table, a.data_scope.indices)
        if key in by_scope:
            raise ConstraintError(f"affix anchors {by_scope[key].id} and {a.id} share a scope")
        by_scope[key] = a
    pairs = []
    for f in follower_units:
        if f.data_scope is None:
            raise ConstraintError(f"affix follower {f.id} has no data scope to pair by")
        key = (f.data_scope.dataset, f.data_scope.table, f.data_scope.indices)
        if key not in by_scope:
            raise ConstraintError(
                f"affix follower {f.id} has no anchor with scope "
                f"{f.data_scope.dataset}[{list(f.data_scope.indices)}]")
        pairs.append((f, by_scope[key]))
    return pairs


def evaluate_affix(scene, spec: ConstraintSpec):
    followers = _expand_pairing_units(
        scene, resolve_selection(scene, spec.params["followers"]))
    anchors = _expand_pairing_units(
        scene, resolve_selection(scene, spec.params["anchors"]))
    try:
        pairs = _pair(scene, followers, anchors)
    except ConstraintError as e:
        return set(), str(e)
    point = spec.params["anchor_point"]
    dx, dy = spec.params["dx"], spec.params["dy"]
    moved = set()
    for follower, anchor in pairs:
        ax, ay = bbox_point(scene.bbox(anchor), point)
        fx, fy = bbox_point(scene.bbox(follower), point)
        ddx, ddy = ax + dx - fx, ay + dy - fy
        if abs(ddx) > TOLERANCE or abs(ddy) > TOLERANCE:
            scene.translate(follower, ddx, ddy, touch=False)
            moved.add(follower.id)
    return moved, None


# ----------------------------------------------------------------- ordering


def set_order(scene, group, key, direction: str = "ascending") -> ConstraintSpec:
    group = scene.resolve(group)
    if not isinstance(group, Group):
        raise ConstraintError("ordering applies to groups")
    if isinstance(key, str):
        key = {"attribute": key}
    if direction not in ("ascending", "descending"):
        raise ConstraintError(f"unknown ordering direction {direction!r}")
    spec = ConstraintSpec(scene.make_id("con"), "order", {
        "group": group.id, "key": key, "direction": direction,
    })
    scene.constraints[spec.id] = spec
    scene.dirty.constraints.add(spec.id)
    scene.maybe_propagate()
    return spec


def _order_key(scene, member, key: dict):
    if "channel" in key:
        value = scene.get_channel(member, key["channel"])
        if value is None:
            raise ConstraintError(
                f"cannot order by channel {key['channel']!r}: {member.id} has no value")
        return value
    attribute = key["attribute"]
    value = scene.get_scope_value(member, attribute)
    if isinstance(value, list):
        raise ConstraintError(
            f"cannot order {member.id} by {attribute!r}: mixed values in scope")
    dataset = scene.dataset(member.data_scope.dataset)
    if member.data_scope.table == "items" and dataset.has_attribute(attribute):
        kind = dataset.attribute(attribute).kind
        if kind in ("nominal", "ordinal", "temporal"):
            ordered = canonical_order(dataset, attribute,
                                      [row[attribute] for row in dataset.items])
            return ordered.index(value)
    return value


def evaluate_order(scene, spec: ConstraintSpec):
    group = scene.elements.get(spec.params["group"])
    if group is None:
        return set(), f"ordering {spec.id} lost its group"
    members = [scene.elements[m] for m in group.members]
    try:
        keyed = [(_order_key(scene, m, spec.params["key"]), i, m.id)
                 for i, m in enumerate(members)]
    except ConstraintError as e:
        return set(), str(e)
    # sort() is stable for equal keys in both directions
    keyed.sort(key=lambda t: t[0], reverse=spec.params["direction"] == "descending")
    new_order = [mid for _, _, mid in keyed]
    if new_order != group.members:
        group.members = new_order
        return {group.id}, None
    return set(), None


def set_z_order(scene, elements, z_values) -> ConstraintSpec:
    els = resolve_selection(scene, elements)
    if len(els) != len(z_values):
        raise ConstraintError("set_z_order needs one z value per element")
    spec = ConstraintSpec(scene.make_id("con"), "z_order", {
        "elements": [e.id for e in els], "z": list(z_values),
    })
    scene.constraints[spec.id] = spec
    scene.dirty.constraints.add(spec.id)
    scene.maybe_propagate()
    return spec


def evaluate_z_order(scene, spec: ConstraintSpec):
    changed = set()
    for el_id, z in zip(spec.params["elements"], spec.params["z"]):
        el = scene.elements.get(el_id)
        if el is not None and el.z_index != z:
            el.z_index = z
            changed.add(el_id)
    return changed, None


# --------------------------------------------------------------- evaluation


def evaluate_constraint(scene, spec: ConstraintSpec):
    """Returns (moved element ids, problem or None)."""
    if spec.kind == "align":
        return evaluate_align(scene, spec)
    if spec.kind == "affix":
        return evaluate_affix(scene, spec)
    if spec.kind == "order":
        return evaluate_order(scene, spec)
    if spec.kind == "z_order":
        return evaluate_z_order(scene, spec)
    raise ConstraintError(f"unknown constraint kind {spec.kind!r}")


def constraint_elements(scene, spec: ConstraintSpec) -> set:
    """Ids the constraint reads or writes, for dirtiness tracking."""
    try:
        if spec.kind == "align":
            els = resolve_selection(scene, spec.params["targets"])
            axis = edge_axis(spec.params["edge"])
            units = [movable_unit(scene, e, axis) for e in els]
            return {e.id for e in els} | {u.id for u in units}
        if spec.kind == "affix":
            els = resolve_selection(scene, spec.params["followers"])
            els += resolve_selection(scene, spec.params["anchors"])
            return {e.id for e in els}
        if spec.kind == "order":
            group = scene.elements.get(spec.params["group"])
            if group is None:
                return set()
            return {group.id} | set(group.members)
        if spec.kind == "z_order":
            return set(spec.params["elements"])
    except Exception:
        return set()
    return set()


def check_satisfaction(scene, spec: ConstraintSpec, tolerance: float = TOLERANCE):
    """True when the relation currently holds (used by validation)."""
    if spec.kind == "align":
        elements = resolve_selection(scene, spec.params["targets"])
        edge = spec.params["edge"]
        values = [edge_value(scene.bbox(el), edge) for el in elements]
        return (max(values) - min(values) <= tolerance) if values else True
    if spec.kind == "affix":
        followers = _expand_pairing_units(
            scene, resolve_selection(scene, spec.params["followers"]))
        anchors = _expand_pairing_units(
            scene, resolve_selection(scene, spec.params["anchors"]))
        try:
            pairs = _pair(scene, followers, anchors)
        except ConstraintError:
            return False
        point = spec.params["anchor_point"]
        for follower, anchor in pairs:
            ax, ay = bbox_point(scene.bbox(anchor), point)
            fx, fy = bbox_point(scene.bbox(follower), point)
            if abs(ax + spec.params["dx"] - fx) > tolerance:
                return False
            if abs(ay + spec.params["dy"] - fy) > tolerance:
                return False
        return True
    if spec.kind == "order":
        moved, problem = evaluate_order_check(scene, spec)
        return problem is None and not moved
    if spec.kind == "z_order":
        return all(scene.elements[eid].z_index == z
                   for eid, z in zip(spec.params["elements"], spec.params["z"])
                   if eid in scene.elements)
    return True


def evaluate_order_check(scene, spec: ConstraintSpec):
    """Like evaluate_order but without mutating the group."""
    group = scene.elements.get(spec.params["group"])
    if group is None:
        return set(), "group missing"
    members = [scene.elements[m] for m in group.members]
    try:
        keyed = [(_order_key(scene, m, spec.params["key"]), i, m.id)
                 for i, m in enumerate(members)]
    except ConstraintError as e:
        return set(), str(e)
    ordered = sorted(keyed, key=lambda t: t[0],
                     reverse=spec.params["direction"] == "descending")
    if [m for _, _, m in ordered] != group.members:
        return {group.id}, None
    return set(), None
