/** Typed client for the annotation service HTTP API. */

export type Stage = "screening" | "annotation";
export type Direction = "positive" | "negative" | "nonlinear";
export type Causality = "causal" | "associative";
export type RecordStatus = "pending" | "screened" | "annotated";

export interface QueueItem {
  sentence_id: string;
  text: string;
  marker: string | null;
  marker_span: [number, number] | null;
  status: RecordStatus;
  is_hypothesis: boolean | null;
}

export interface Progress {
  pending: number;
  screened: number;
  annotated: number;
  total: number;
}

export interface QueueView {
  stage: Stage;
  items: QueueItem[];
  progress: Progress;
}

export interface RecordView {
  sentence_id: string;
  status: RecordStatus;
  is_hypothesis: boolean | null;
  node1_span: [number, number] | null;
  node2_span: [number, number] | null;
  direction: Direction | null;
  causality: Causality | null;
  annotator: string;
  timestamp: string;
}

export interface IngestResult {
  doc_id: string;
  n_sentences: number;
  n_candidates: number;
  n_enqueued: number;
}

export interface ScreeningJudgment {
  is_hypothesis: boolean;
  annotator?: string;
}

export interface AnnotationJudgment {
  node1_span: [number, number];
  node2_span: [number, number];
  direction: Direction;
  causality: Causality;
  annotator?: string;
}

export type Judgment = ScreeningJudgment | AnnotationJudgment;

/** Error body the server returns with 400/404 responses. */
export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly error: string,
    public readonly detail: string,
  ) {
    super(`${error}: ${detail}`);
  }
}

async function parseError(resp: Response): Promise<ApiError> {
  try {
    const body = (await resp.json()) as { error?: string; detail?: string };
    return new ApiError(resp.status, body.error ?? "HttpError", body.detail ?? resp.statusText);
  } catch {
    return new ApiError(resp.status, "HttpError", resp.statusText);
  }
}

export class AnnotationApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const resp = await this.fetchFn(`${this.baseUrl}${path}`, init);
    if (!resp.ok) {
      throw await parseError(resp);
    }
    return resp;
  }

  async ingestDocument(text: string, docId?: string): Promise<IngestResult> {
    const resp = await this.request("/api/documents", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ doc_id: docId ?? null, text }),
    });
    return (await resp.json()) as IngestResult;
  }

  async fetchQueue(stage: Stage, limit = 20): Promise<QueueView> {
    const resp = await this.request(
      `/api/queue?stage=${encodeURIComponent(stage)}&limit=${limit}`,
    );
    return (await resp.json()) as QueueView;
  }

  async submitLabel(sentenceId: string, judgment: Judgment): Promise<RecordView> {
    const resp = await this.request(`/api/labels/${encodeURIComponent(sentenceId)}`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(judgment),
    });
    return (await resp.json()) as RecordView;
  }

  async exportDataset(kind: string, format: "jsonl" | "tsv" = "jsonl"): Promise<string> {
    const resp = await this.request(`/api/export?kind=${kind}&format=${format}`);
    return await resp.text();
  }

  async stats(): Promise<Record<string, unknown>> {
    const resp = await this.request("/api/stats");
    return (await resp.json()) as Record<string, unknown>;
  }
}
