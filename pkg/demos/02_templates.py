"""
Scene files as chart templates
==============================

A serialized scene is self-contained: datasets ride along and data scopes
reference them by row index. Repopulating swaps in a new dataset, and the
member counts at every nesting level follow the new unique-value counts.
"""

from pathlib import Path

import vizscene as vz

DATA = Path(__file__).resolve().parent.parent / "gallery" / "data"
OUT = Path(__file__).resolve().parent / "out"
OUT.mkdir(exist_ok=True)

###############################################################################
# Build a grouped chart over regional sales: 4 regions x 2 products.

sales = vz.import_table((DATA / "sales.csv").read_bytes(), "sales")
scene = vz.create_scene()
scene.add_dataset(sales)

rows = vz.repeat(scene, scene.create_mark("rectangle", {"height": 14}),
                 "sales", "region")
vz.divide(scene, scene.elements[rows.members[0]], "sales", "product",
          orientation="horizontal")
vz.apply_encoding(scene, scene.elements[scene.elements[rows.members[0]].members[0]],
                  "width", "value")
print("template:", len(rows.members), "groups of",
      [len(scene.elements[m].members) for m in rows.members])

###############################################################################
# Save it, reload it, and the reconstructed scene keeps working: operations
# apply to it exactly as to the original.

template_path = OUT / "sales_template.json"
template_path.write_text(vz.serialize_scene(scene))
restored = vz.deserialize_scene(template_path.read_text())

###############################################################################
# Apply the template to a different dataset with different cardinalities:
# 3 continents holding 3, 2 and 4 countries. Attribute pairs map new columns
# onto the ones that drove the template, including the encoded measure.

countries = vz.import_table((DATA / "countries.csv").read_bytes(), "countries")
restored.add_dataset(countries)
target = restored.elements[rows.id]
vz.repopulate(restored, target, "countries",
              [("continent", "region"), ("country", "product"),
               ("population", "value")])
print("repopulated:", len(target.members), "groups of",
      [len(restored.elements[m].members) for m in target.members])

(OUT / "population_chart.svg").write_text(vz.render(restored, width=640, height=360))
print("wrote", OUT / "population_chart.svg")
