"""
Layouts, direct channel edits, and one-way propagation
======================================================

Position is owned by exactly one description at a time: an algorithmic
layout, a position encoding, or a constraint. Everything downstream of a
change is re-evaluated automatically, and a second propagation pass finds
nothing left to do.
"""

from pathlib import Path

import vizscene as vz

DATA = Path(__file__).resolve().parent.parent / "gallery" / "data"
OUT = Path(__file__).resolve().parent / "out"
OUT.mkdir(exist_ok=True)

###############################################################################
# Twelve month tiles under a waffle grid; ordering is itself a constraint,
# so re-sorting reflows the grid.

months = vz.import_table((DATA / "months.csv").read_bytes(), "months")
scene = vz.create_scene()
scene.add_dataset(months)

tiles = vz.repeat(scene, scene.create_mark("rectangle", {"width": 16, "height": 16}),
                  "months", "month")
vz.apply_layout(scene, tiles, {"type": "grid", "num_cols": 4, "gap_x": 3, "gap_y": 3})
vz.apply_encoding(scene, scene.elements[tiles.members[0]], "fill", "quarter")
vz.set_order(scene, tiles, {"attribute": "value"}, "descending")
(OUT / "waffle.svg").write_text(vz.render(scene, width=300, height=200))

###############################################################################
# Turning the same collection into a packed-bubble arrangement: sizes feed
# the layout, so re-encoding a size channel re-triggers the packing.

bubbles_scene = vz.create_scene()
bubbles_scene.add_dataset(months)
pack = vz.repeat(bubbles_scene,
                 bubbles_scene.create_mark("circle", {"radius": 10}),
                 "months", "month")
radius = vz.apply_encoding(bubbles_scene, bubbles_scene.elements[pack.members[0]],
                           "radius", "value")
vz.apply_layout(bubbles_scene, pack, {"type": "packing", "padding": 2})
vz.customize_scale(bubbles_scene, radius.scale, {"range": [4, 28]})
print("after scale edit, re-evaluated:",
      bubbles_scene.last_report.as_dict()["evaluated"])
(OUT / "bubbles.svg").write_text(vz.render(bubbles_scene, width=300, height=300))

###############################################################################
# Propagation is idempotent: once the dirty set drains, a fresh pass
# evaluates nothing.

print("second pass:", bubbles_scene.propagate().as_dict())

###############################################################################
# Direct channel writes go through the same machinery. Setting a channel on
# one element leaves its peers alone; the peers form quickly via the
# generating operation, and set_channel_peers fans out over them.

bubbles_scene.set_channel(bubbles_scene.elements[pack.members[0]], "stroke", "#333")
first = bubbles_scene.elements[pack.members[0]]
print("stroked:", first.channels.get("stroke"),
      "peer untouched:", bubbles_scene.elements[pack.members[1]].channels.get("stroke"))
