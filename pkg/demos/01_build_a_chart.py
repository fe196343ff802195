"""
Building a diverging stacked bar chart
======================================

A walkthrough of the core workflow: import data, create a mark, join it
with the data through repeat and divide, bind attributes to channels, and
keep the design consistent with relational constraints.
"""

from pathlib import Path

import vizscene as vz

DATA = Path(__file__).resolve().parent.parent / "gallery" / "data"
OUT = Path(__file__).resolve().parent / "out"
OUT.mkdir(exist_ok=True)

###############################################################################
# A survey table: sixteen rows of (age, response, pct). Column kinds are
# inferred on import; pct parses as a number, so it comes back quantitative.

survey = vz.import_table((DATA / "survey.csv").read_bytes(), "survey")
print([f"{a.name}:{a.kind}" for a in survey.attributes])
print("ages:", vz.unique_values(survey, "age"))

###############################################################################
# Start from a single rectangle. Repeating it by age yields a collection of
# four rectangles, one per unique age value; each copy's data scope is the
# set of rows holding that value.

scene = vz.create_scene()
scene.add_dataset(survey)

bar = scene.create_mark("rectangle", {"width": 30, "height": 20})
rows = vz.repeat(scene, bar, "survey", "age")
print("rows:", len(rows.members), "member scope sizes:",
      [len(scene.elements[m].data_scope) for m in rows.members])

###############################################################################
# Dividing one rectangle applies to all of its peers, splitting each row into
# four stacked segments. The sixteen leaves are peers of each other, so a
# single encoding call covers them all.

vz.divide(scene, scene.elements[rows.members[0]], "survey", "response",
          orientation="horizontal")
leaf = scene.elements[scene.elements[rows.members[0]].members[0]]
print("leaf peers:", len(scene.peers_of(leaf)))

vz.apply_encoding(scene, leaf, "width", "pct")
fill = vz.apply_encoding(scene, leaf, "fill", "response")

###############################################################################
# The diverging look comes from a relational constraint: right-align the
# segments of one response category. The rows sit in horizontal stacks, so
# the engine translates whole rows to satisfy the alignment.

vz.align(scene, {"from": rows.id,
                 "where": {"attribute": "response", "value": "strongly disagree"}},
         edge="right")

###############################################################################
# Labels are texts repeated over the same data and affixed to the rectangle
# centers; pairing is by equal data scope and survives later edits.

label = scene.create_mark("text", {"text": "", "fill": "#ffffff", "font_size": 9})
by_age = vz.repeat(scene, label, "survey", "age")
labels = vz.repeat(scene, by_age, "survey", "response")
vz.apply_encoding(scene, scene.elements[scene.elements[labels.members[0]].members[0]],
                  "text", "pct")
vz.affix(scene, labels.id, rows.id, "center")

scene.add_legend("fill", fill.scale, "right")

###############################################################################
# Everything renders deterministically to standalone SVG.

svg = vz.render(scene, width=640, height=360)
(OUT / "diverging_bar.svg").write_text(svg)
print("wrote", OUT / "diverging_bar.svg", f"({len(svg)} bytes)")
