// Recover the ordered block ids from an exported notebook file: every
// exported code cell starts with a catalog block's code verbatim; the
// dataset preamble matches nothing and is skipped. Longest match wins when
// one block's code is a prefix of another's.

import type { CatalogBlock } from "./types.js";

interface NotebookCellJson {
  cell_type: string;
  source: string | string[];
}

export interface NotebookJson {
  nbformat: number;
  nbformat_minor: number;
  cells: NotebookCellJson[];
}

export function cellSource(cell: NotebookCellJson): string {
  return Array.isArray(cell.source) ? cell.source.join("") : cell.source;
}

export function recoverBlockIds(notebook: NotebookJson, catalog: CatalogBlock[]): string[] {
  const recovered: string[] = [];
  for (const cell of notebook.cells) {
    if (cell.cell_type !== "code") {
      continue;
    }
    const source = cellSource(cell);
    let best: CatalogBlock | null = null;
    for (const block of catalog) {
      if (source.startsWith(block.code)) {
        if (best === null || block.code.length > best.code.length) {
          best = block;
        }
      }
    }
    if (best !== null) {
      recovered.push(best.id);
    }
  }
  return recovered;
}
