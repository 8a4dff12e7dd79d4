import type { CatalogBlock, DatasetInfo, SessionView } from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

async function parseError(response: Response): Promise<ApiError> {
  let code = "http-error";
  let message = `${response.status} ${response.statusText}`;
  try {
    const body = (await response.json()) as { error?: { code?: string; message?: string } };
    if (body.error) {
      code = body.error.code ?? code;
      message = body.error.message ?? message;
    }
  } catch {
    // non-JSON error body; keep the generic message
  }
  return new ApiError(response.status, code, message);
}

export class ApiClient {
  constructor(public readonly baseUrl: string = "") {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.baseUrl + path, init);
    if (!response.ok) {
      throw await parseError(response);
    }
    return (await response.json()) as T;
  }

  listDatasets(): Promise<{ datasets: DatasetInfo[] }> {
    return this.request("/datasets");
  }

  getCatalog(): Promise<{ blocks: CatalogBlock[] }> {
    return this.request("/catalog");
  }

  uploadDataset(name: string, csv: Blob | string): Promise<DatasetInfo> {
    return this.request(`/datasets?name=${encodeURIComponent(name)}`, {
      method: "POST",
      body: csv,
      headers: { "Content-Type": "text/csv" },
    });
  }

  createSession(datasetId: string): Promise<SessionView> {
    return this.request("/sessions", {
      method: "POST",
      body: JSON.stringify({ dataset_id: datasetId }),
      headers: { "Content-Type": "application/json" },
    });
  }

  getSession(sessionId: string): Promise<SessionView> {
    return this.request(`/sessions/${sessionId}`);
  }

  postStep(
    sessionId: string,
    panelIndex: number,
    advisorId: string,
    blockId: string,
  ): Promise<{ session: SessionView }> {
    return this.request(`/sessions/${sessionId}/steps`, {
      method: "POST",
      body: JSON.stringify({
        panel_index: panelIndex,
        advisor_id: advisorId,
        block_id: blockId,
      }),
      headers: { "Content-Type": "application/json" },
    });
  }

  deleteCell(sessionId: string, cellIndex: number): Promise<SessionView> {
    return this.request(`/sessions/${sessionId}/cells/${cellIndex}`, {
      method: "DELETE",
    });
  }

  exportNotebookUrl(sessionId: string): string {
    return `${this.baseUrl}/sessions/${sessionId}/export.ipynb`;
  }

  exportCellNotebookUrl(sessionId: string, cellIndex: number): string {
    return `${this.baseUrl}/sessions/${sessionId}/cells/${cellIndex}/export.ipynb`;
  }

  exportCellCsvUrl(sessionId: string, cellIndex: number): string {
    return `${this.baseUrl}/sessions/${sessionId}/cells/${cellIndex}/export.csv`;
  }

  cellImageUrl(sessionId: string, cellIndex: number, imageName: string): string {
    return `${this.baseUrl}/sessions/${sessionId}/cells/${cellIndex}/images/${imageName}`;
  }
}
