"""Walk a guided notebook session against the bundled Cars dataset.

Uses the seed advisors and the mock executor (no sidecar process), so this
demo is about the session mechanics: panels, selections, the replace rule,
tag sync between advisors, and exporting the workflow as a notebook file.
"""

import tempfile
from pathlib import Path

from lodestar.kernel import MockKernelHandle
from lodestar.seed import build_seed_advisors, cars_csv_bytes, load_seed_catalog
from lodestar.session import Session, recover_block_sequence

catalog = load_seed_catalog()
advisors = build_seed_advisors()
executor = MockKernelHandle()

dataset = executor.load_dataset(cars_csv_bytes(), "cars", "cars")
print(f"loaded {dataset.name}: {dataset.row_count} rows, {len(dataset.schema)} columns")

session = Session("demo", dataset, advisors, catalog)


def show_panel(panel):
    print(f"\npanel {panel.panel_index}:")
    for advisor_id, ranked in sorted(panel.per_advisor.items()):
        names = [f"{catalog.get(b).name} ({p:.0%})" for b, p in ranked]
        print(f"  {advisor_id:>6}: {', '.join(names) or '(nothing suitable)'}")


def run(advisor_id, block_id, panel_index=None):
    panel_index = len(session.cells) if panel_index is None else panel_index
    block = catalog.get(block_id)
    input_ref = session.input_ref_for_panel(panel_index, executor.dataset_ref("cars"))
    execution = executor.execute_block(block, input_ref)
    if panel_index == len(session.cells):
        session.append_cell(advisor_id, block, execution)
    else:
        session.replace_cell(panel_index, advisor_id, block, execution)
    print(f"\n-> selected '{block.name}' from the {advisor_id} advisor")


show_panel(session.panels[0])

run("expert", "first-10-samples")
show_panel(session.panels[-1])

run("expert", "group-statistics")
print("cursors after two steps:", [(c.advisor_id, c.state) for c in session.cursors])

# change of mind: category count instead of group statistics (same panel)
run("expert", "category-count", panel_index=1)
show_panel(session.panels[-1])
print("cells now:", [c.block_id for c in session.cells])
print("progress of last cell:", session.cells[-1].progress)

out = Path(tempfile.mkdtemp(prefix="lodestar-demo-")) / session.export_filename()
out.write_bytes(session.export_notebook())
print(f"\nworkflow exported to {out}")
print("blocks recovered from the export:", recover_block_sequence(out.read_bytes(), catalog))
