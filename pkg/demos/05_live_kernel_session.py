"""Run analysis blocks for real through the kernel sidecar.

Starts kernel/lodestar_kernel.py as a subprocess, loads the Cars dataset,
executes 'first 10 samples' and 'category count' on live pandas frames,
and writes the produced bar chart and CSV export to a scratch directory.
"""

import sys
import tempfile
from pathlib import Path

from lodestar.kernel import KernelProcessHandle
from lodestar.seed import cars_csv_bytes, load_seed_catalog

kernel_script = Path(__file__).resolve().parent.parent / "kernel" / "lodestar_kernel.py"
kernel = KernelProcessHandle(f"{sys.executable} {kernel_script}", "demo")
print("kernel handshake:", kernel.hello())

catalog = load_seed_catalog()
dataset = kernel.load_dataset(cars_csv_bytes(), "cars", "cars")
print(f"loaded cars: {dataset.row_count} rows; schema kinds: "
      f"{dict((c, k) for c, k in dataset.schema)}")

first = kernel.execute_block(catalog.get("first-10-samples"), kernel.dataset_ref("cars"))
print(f"\n'first 10 samples' -> {first.full_row_count} rows in {first.duration_ms} ms")
for row in first.table_preview.rows[:3]:
    print("  ", row)

counts = kernel.execute_block(catalog.get("category-count"), kernel.dataset_ref("cars"))
print(f"\n'category count' -> {counts.full_row_count} categories")
for row in counts.table_preview.rows:
    print("  ", row)

outdir = Path(tempfile.mkdtemp(prefix="lodestar-demo-artifacts-"))
for name, png in counts.images:
    (outdir / name).write_bytes(png)
    print(f"\nchart saved to {outdir / name} ({len(png)} bytes)")

(outdir / "category_count.csv").write_bytes(kernel.export_frame_csv(counts.output_ref))
print(f"full output frame exported to {outdir / 'category_count.csv'}")

kernel.close()
print("kernel shut down cleanly")
