// The notebook workbench: a menu panel, the linear list of executed cells
// (five tabs each), and one recommendation panel per cell boundary with a
// row of buttons per advisor plus the full-catalog drop-down.
//
// The client is deliberately thin: every number and ordering on screen
// comes straight from a service payload, the server stays the source of
// truth (no optimistic updates), and at most one mutation is in flight at
// a time. A stale-panel conflict (409) just reloads the session.

import { ApiClient, ApiError } from "./api.js";
import type {
  CatalogBlock,
  CellView,
  DatasetInfo,
  PanelView,
  SessionView,
  TabName,
} from "./types.js";
import { TAB_ORDER } from "./types.js";

type Attrs = Record<string, string | boolean | ((event: Event) => void)>;

function el(tag: string, attrs: Attrs = {}, children: (Node | string)[] = []): HTMLElement {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (typeof value === "function") {
      node.addEventListener(key, value);
    } else if (typeof value === "boolean") {
      if (value) {
        node.setAttribute(key, "");
      }
    } else {
      node.setAttribute(key, value);
    }
  }
  for (const child of children) {
    node.append(child);
  }
  return node;
}

function percent(probability: number): string {
  return `${Math.round(probability * 100)}%`;
}

export class App {
  readonly api: ApiClient;
  session: SessionView | null = null;
  catalog: CatalogBlock[] = [];
  datasets: DatasetInfo[] = [];
  busy = false;
  errorMessage: string | null = null;

  private activeTabs = new Map<number, TabName>();
  private lastOp: Promise<void> = Promise.resolve();

  constructor(readonly root: HTMLElement, baseUrl = "") {
    this.api = new ApiClient(baseUrl);
  }

  /** Resolves once every queued mutation has settled (for tests). */
  whenIdle(): Promise<void> {
    return this.lastOp;
  }

  private enqueue(op: () => Promise<void>): Promise<void> {
    const run = this.lastOp.then(async () => {
      this.busy = true;
      this.render();
      try {
        await op();
        this.errorMessage = null;
      } catch (error) {
        await this.handleError(error);
      } finally {
        this.busy = false;
        this.render();
      }
    });
    this.lastOp = run;
    return run;
  }

  private async handleError(error: unknown): Promise<void> {
    if (error instanceof ApiError && error.status === 409 && this.session) {
      // stale panel or restored session: the server moved on, re-sync
      this.session = await this.api.getSession(this.session.session_id);
      this.errorMessage = `${error.message} — session refreshed`;
      return;
    }
    this.errorMessage = error instanceof Error ? error.message : String(error);
  }

  async init(): Promise<void> {
    const [datasets, catalog] = await Promise.all([
      this.api.listDatasets(),
      this.api.getCatalog(),
    ]);
    this.datasets = datasets.datasets;
    this.catalog = catalog.blocks;
    this.render();
  }

  startSession(datasetId: string): Promise<void> {
    return this.enqueue(async () => {
      this.activeTabs.clear();
      this.session = await this.api.createSession(datasetId);
    });
  }

  selectStep(panelIndex: number, advisorId: string, blockId: string): Promise<void> {
    return this.enqueue(async () => {
      if (!this.session) {
        throw new Error("no session in progress");
      }
      const result = await this.api.postStep(
        this.session.session_id,
        panelIndex,
        advisorId,
        blockId,
      );
      this.session = result.session;
    });
  }

  deleteCell(cellIndex: number): Promise<void> {
    return this.enqueue(async () => {
      if (!this.session) {
        throw new Error("no session in progress");
      }
      this.session = await this.api.deleteCell(this.session.session_id, cellIndex);
    });
  }

  refresh(): Promise<void> {
    return this.enqueue(async () => {
      if (this.session) {
        this.session = await this.api.getSession(this.session.session_id);
      }
    });
  }

  private setTab(cellIndex: number, tab: TabName): void {
    this.activeTabs.set(cellIndex, tab);
    this.render();
  }

  // -- rendering ---------------------------------------------------------

  render(): void {
    this.root.replaceChildren(
      this.renderMenu(),
      this.renderErrorBanner(),
      this.renderNotebook(),
    );
  }

  private renderMenu(): HTMLElement {
    const options = this.datasets.map((dataset) =>
      el("option", { value: dataset.dataset_id }, [
        `${dataset.name} (${dataset.row_count} rows)`,
      ]),
    );
    const select = el("select", { class: "dataset-select" }, options) as HTMLSelectElement;
    if (this.session) {
      select.value = this.session.dataset.dataset_id;
    }
    const children: (Node | string)[] = [
      el("span", { class: "brand" }, ["lodestar"]),
      select,
      el(
        "button",
        {
          class: "start-session",
          disabled: this.busy,
          click: () => void this.startSession(select.value),
        },
        [this.session ? "restart with dataset" : "start analysis"],
      ),
    ];
    if (this.session && this.session.cells.length > 0) {
      children.push(
        el(
          "a",
          {
            class: "export-notebook",
            href: this.api.exportNotebookUrl(this.session.session_id),
            download: `${this.session.dataset.name}_analysis.ipynb`,
          },
          ["export notebook"],
        ),
      );
    }
    return el("header", { class: "menu" }, children);
  }

  private renderErrorBanner(): HTMLElement {
    if (!this.errorMessage) {
      return el("div", { class: "error-banner", hidden: true });
    }
    return el("div", { class: "error-banner", role: "alert" }, [
      this.errorMessage,
      el("button", { class: "dismiss", click: () => {
        this.errorMessage = null;
        this.render();
      } }, ["dismiss"]),
    ]);
  }

  private renderNotebook(): HTMLElement {
    if (!this.session) {
      return el("main", { class: "notebook empty" }, [
        el("p", {}, ["Pick a dataset to begin."]),
      ]);
    }
    const children: HTMLElement[] = [];
    const panels = this.session.panels;
    const cells = this.session.cells;
    for (let i = 0; i < Math.max(panels.length, cells.length); i += 1) {
      const panel = panels[i];
      if (panel) {
        children.push(this.renderPanel(panel));
      }
      const cell = cells[i];
      if (cell) {
        children.push(this.renderCell(cell));
      }
    }
    return el("main", { class: "notebook" }, children);
  }

  private renderPanel(panel: PanelView): HTMLElement {
    const rows = Object.entries(panel.advisors)
      .sort(([a], [b]) => a.localeCompare(b))
      .map(([advisorId, recommendations]) => this.renderAdvisorRow(panel, advisorId, recommendations));
    return el(
      "section",
      { class: "panel", "data-panel-index": String(panel.panel_index) },
      [
        el("h3", {}, [`recommendations ${panel.panel_index}`]),
        ...rows,
        this.renderCatalogFallback(panel),
      ],
    );
  }

  private renderAdvisorRow(
    panel: PanelView,
    advisorId: string,
    recommendations: { block_id: string; name: string; description: string; probability: number }[],
  ): HTMLElement {
    const buttons = recommendations.map((rec) => {
      const selected =
        panel.selected === rec.block_id && panel.selected_advisor === advisorId;
      return el(
        "button",
        {
          class: selected ? "rec selected" : "rec",
          title: rec.description,
          disabled: this.busy,
          "data-block": rec.block_id,
          click: () => void this.selectStep(panel.panel_index, advisorId, rec.block_id),
        },
        [`${rec.name} · ${percent(rec.probability)}`],
      );
    });
    return el("div", { class: "advisor-row", "data-advisor": advisorId }, [
      el("span", { class: "advisor-label" }, [advisorId]),
      ...(buttons.length > 0
        ? buttons
        : [el("span", { class: "no-recs" }, ["no suitable recommendations"])]),
    ]);
  }

  private renderCatalogFallback(panel: PanelView): HTMLElement {
    const options = this.catalog.map((block) =>
      el("option", { value: block.id, title: block.description }, [
        `${block.name} [${block.origin}]`,
      ]),
    );
    const select = el(
      "select",
      { class: "catalog-select" },
      [el("option", { value: "" }, ["full catalog of analysis steps…"]), ...options],
    ) as HTMLSelectElement;
    return el("div", { class: "catalog-fallback" }, [
      select,
      el(
        "button",
        {
          class: "catalog-go",
          disabled: this.busy,
          click: () => {
            if (select.value) {
              void this.selectStep(panel.panel_index, "catalog", select.value);
            }
          },
        },
        ["run"],
      ),
    ]);
  }

  private renderCell(cell: CellView): HTMLElement {
    const active = this.activeTabs.get(cell.cell_index) ?? "output_data_frame";
    const tabButtons = TAB_ORDER.map(([tab, label]) =>
      el(
        "button",
        {
          class: tab === active ? "tab active" : "tab",
          "data-tab": tab,
          click: () => this.setTab(cell.cell_index, tab),
        },
        [label],
      ),
    );
    const statusBadge =
      cell.execution_status === "ok"
        ? el("span", { class: "status ok" }, ["ok"])
        : el("span", { class: "status error", title: cell.error_message ?? "" }, ["failed"]);
    return el(
      "article",
      { class: `cell ${cell.execution_status}`, "data-cell-index": String(cell.cell_index) },
      [
        el("header", { class: "cell-header" }, [
          el("span", { class: "cell-title" }, [`${cell.cell_index + 1}. ${cell.name}`]),
          statusBadge,
          el(
            "button",
            {
              class: "delete-cell",
              title: "delete this cell and everything after it",
              disabled: this.busy,
              click: () => void this.deleteCell(cell.cell_index),
            },
            ["delete"],
          ),
        ]),
        el("nav", { class: "tabs" }, tabButtons),
        this.renderTabBody(cell, active),
      ],
    );
  }

  private renderTabBody(cell: CellView, tab: TabName): HTMLElement {
    const session = this.session;
    if (!session) {
      return el("div", {});
    }
    const sessionId = session.session_id;
    switch (tab) {
      case "output_data_frame": {
        const frame = cell.tabs.output_data_frame;
        if (cell.execution_status !== "ok") {
          return el("div", { class: "tab-body" }, [
            el("pre", { class: "error-text" }, [cell.error_message ?? "execution failed"]),
          ]);
        }
        const header = el(
          "tr",
          {},
          frame.schema.map(([name, kind]) =>
            el("th", { title: kind }, [name]),
          ),
        );
        const body = frame.rows.map((row) =>
          el(
            "tr",
            {},
            row.map((value) => el("td", {}, [value === null ? "" : String(value)])),
          ),
        );
        const note = frame.truncated
          ? [`showing ${frame.rows.length} of ${frame.full_row_count} rows`]
          : [`${frame.full_row_count} rows`];
        return el("div", { class: "tab-body" }, [
          el("table", { class: "output-frame" }, [header, ...body]),
          el("p", { class: "frame-note" }, note),
          el(
            "a",
            {
              class: "export-csv",
              href: this.api.exportCellCsvUrl(sessionId, cell.cell_index),
              download: `cell_${cell.cell_index}.csv`,
            },
            ["download full CSV"],
          ),
        ]);
      }
      case "analysis_results": {
        const results = cell.tabs.analysis_results;
        const images = results.images.map((name) =>
          el("img", {
            class: "artifact",
            alt: name,
            src: this.api.cellImageUrl(sessionId, cell.cell_index, name),
          }),
        );
        return el("div", { class: "tab-body" }, [
          el("pre", { class: "stdout" }, [results.stdout || "(no text output)"]),
          ...images,
        ]);
      }
      case "script":
        return el("div", { class: "tab-body" }, [
          el("pre", { class: "script" }, [cell.tabs.script]),
          el(
            "a",
            {
              class: "export-cell-notebook",
              href: this.api.exportCellNotebookUrl(sessionId, cell.cell_index),
              download: `step_${cell.cell_index}.ipynb`,
            },
            ["export this step as a notebook"],
          ),
        ]);
      case "whats_this_analysis":
        return el("div", { class: "tab-body" }, [
          el("p", { class: "description" }, [cell.tabs.whats_this_analysis]),
        ]);
      case "analysis_progress":
        return el("div", { class: "tab-body" }, [
          el(
            "ol",
            { class: "progress" },
            cell.tabs.analysis_progress.map((name) => el("li", {}, [name])),
          ),
        ]);
    }
  }
}
