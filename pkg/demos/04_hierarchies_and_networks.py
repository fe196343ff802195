"""
Hierarchies and networks
========================

Stratify lays a tree out as an icicle (from a rectangle) or a sunburst
(from a circle). The network form of repeat creates one node element per
item value and one link mark per edge, with link geometry tracking the
node elements it connects.
"""

from pathlib import Path

import vizscene as vz

DATA = Path(__file__).resolve().parent.parent / "gallery" / "data"
OUT = Path(__file__).resolve().parent / "out"
OUT.mkdir(exist_ok=True)

###############################################################################
# The tree dataset validates its link structure on use: a single root and
# no cycles. Node extents come out proportional to their leaf counts.

tree = vz.import_network((DATA / "tree.json").read_bytes(), "tree")
icicle_scene = vz.create_scene()
icicle_scene.add_dataset(tree)
layers = vz.stratify(icicle_scene,
                     icicle_scene.create_mark("rectangle",
                                              {"width": 320, "height": 160}),
                     "tree", "id", orientation="vertical")
vz.apply_encoding(icicle_scene, icicle_scene.elements[layers.members[0]],
                  "fill", "branch")
(OUT / "icicle.svg").write_text(vz.render(icicle_scene, width=360, height=200))

sunburst_scene = vz.create_scene()
sunburst_scene.add_dataset(tree)
rings = vz.stratify(sunburst_scene,
                    sunburst_scene.create_mark("circle", {"radius": 110,
                                                          "x": 120, "y": 120}),
                    "tree", "id")
vz.apply_encoding(sunburst_scene, sunburst_scene.elements[rings.members[0]],
                  "fill", "branch")
(OUT / "sunburst.svg").write_text(vz.render(sunburst_scene, width=260, height=260))

###############################################################################
# A node-link diagram: circles for items, lines for links. Packing the node
# collection moves the nodes; the link endpoints follow automatically.

net = vz.import_network((DATA / "net.json").read_bytes(), "net")
nl_scene = vz.create_scene()
nl_scene.add_dataset(net)
nodes, links = vz.repeat_network(nl_scene,
                                 nl_scene.create_mark("circle", {"radius": 12}),
                                 nl_scene.create_mark("line", {"stroke": "#bbb",
                                                               "stroke_width": 2}),
                                 "net", "id")
vz.apply_layout(nl_scene, nodes, {"type": "packing", "padding": 10})
vz.apply_encoding(nl_scene, nl_scene.elements[nodes.members[0]], "fill", "circle")
vz.set_z_order(nl_scene, [nodes.id, links.id], [1, 0])

first_link = nl_scene.elements[links.members[0]]
print("first link connects", first_link.source_node, "->", first_link.target_node)
(OUT / "node_link.svg").write_text(vz.render(nl_scene, width=300, height=300))

###############################################################################
# The annotated export carries each mark's identity, role and data: the
# datum attribute holds the scope's attribute values as JSON.

dsvg = vz.export_dsvg(nl_scene, width=300, height=300)
line = next(l for l in dsvg.splitlines() if "data-datum" in l)
print(line.strip()[:120], "...")
