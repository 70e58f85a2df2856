// Typed client for the pipeline service. The UI talks to the server only
// through this module; it never simulates server state.

export interface BlockDoc {
  id: string;
  kind: string;
  display_name?: string;
  description?: string;
  input_payload?: string;
  output_payload?: string;
  config?: Record<string, unknown>;
}

export interface GraphDoc {
  blocks: BlockDoc[];
  edges: [string, string][];
  entry: string;
  exit: string;
}

export interface DecisionDoc {
  label: string;
  score: number;
  source_block: string;
}

export interface ExecuteDoc {
  run_id: string;
  status: "completed" | "rejected" | "halted";
  decision: DecisionDoc | null;
  reason: string | null;
  block: string | null;
  dry_run: boolean;
  trace_ref: string;
}

export interface WhatIfDoc {
  run_id: string;
  status: "completed" | "rejected" | "halted";
  decision: DecisionDoc | null;
  scores: Record<string, number> | null;
  reason: string | null;
  vector: Record<string, number> | null;
  trace_ref: string;
}

export interface ShutdownDoc {
  active: boolean;
  reason?: string;
  author: string;
  changed?: boolean;
}

export interface RunSummaryDoc {
  run_id: string;
  events: number;
  started: string;
  last_event: string;
  dry_run: boolean;
}

export interface TraceEventDoc {
  seq: number;
  run_id: string;
  block_id: string | null;
  event: string;
  payload_snapshot: Record<string, unknown>;
  timestamp: string;
}

export interface RuleDoc {
  id: string;
  priority?: number;
  condition?: unknown;
  predicate?: unknown;
  replacement?: { label: string; score: number };
  reject_message?: string;
  rationale?: string;
}

export interface PredictDoc {
  block_id: string;
  scores: Record<string, number>;
  argmax: string;
}

export interface PhiEntry {
  feature: string;
  value: number;
}

export interface ExplanationDoc {
  method: string;
  target_class: string;
  base_value: number;
  phi: PhiEntry[];
  fidelity: Record<string, number> | null;
  sample_count: number;
  seed: number;
}

export interface TrainingRowDoc {
  row_index: number;
  features: Record<string, number>;
  label: string;
}

export interface TrainingSliceDoc {
  block_id: string;
  total: number;
  offset: number;
  rows: TrainingRowDoc[];
}

export interface RetrainDoc {
  block_id: string;
  applied: number;
  model: Record<string, unknown>;
}

export interface ChatTurnDoc {
  role: "user" | "assistant" | "tool";
  content: string;
  tool_call: { call_id: string; tool_name: string; arguments: Record<string, unknown> } | null;
  tool_result: { call_id: string; result: unknown } | null;
}

export interface ChatDoc {
  conversation_id: string;
  turns: ChatTurnDoc[];
  truncated: boolean;
}

export interface OffsetsDoc {
  offsets: Record<string, number>;
  active: boolean;
  rationale?: string;
}

export interface StrategyDoc {
  kind: string;
  weights?: Record<string, number>;
}

export interface PredicateDoc {
  expression: unknown;
  action: string;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
    public detail: unknown = null,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export type FetchFn = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private base: string = "/api/v1",
    private fetchFn: FetchFn = (url, init) => globalThis.fetch(url, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: {} };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const resp = await this.fetchFn(this.base + path, init);
    const text = await resp.text();
    const doc = text ? JSON.parse(text) : null;
    if (!resp.ok) {
      const code = doc && typeof doc.code === "string" ? doc.code : "http_error";
      const message = doc && typeof doc.message === "string" ? doc.message : resp.statusText;
      throw new ApiError(resp.status, code, message, doc ? doc.detail : null);
    }
    return doc as T;
  }

  getGraph(): Promise<GraphDoc> {
    return this.request("GET", "/graph");
  }

  execute(features: Record<string, number>): Promise<ExecuteDoc> {
    return this.request("POST", "/pipeline/execute", { features });
  }

  whatIf(base: Record<string, number>, overrides: Record<string, number>): Promise<WhatIfDoc> {
    return this.request("POST", "/pipeline/whatif", { base, overrides });
  }

  getShutdown(): Promise<ShutdownDoc> {
    return this.request("GET", "/control/shutdown");
  }

  triggerShutdown(reason: string, author: string): Promise<ShutdownDoc> {
    return this.request("POST", "/control/shutdown", { reason, author });
  }

  clearShutdown(author: string): Promise<ShutdownDoc> {
    return this.request("POST", "/control/clear", { author });
  }

  traceSummary(): Promise<{ runs: RunSummaryDoc[] }> {
    return this.request("GET", "/trace");
  }

  traceRun(runId: string): Promise<{ run_id: string; events: TraceEventDoc[] }> {
    return this.request("GET", `/trace?run_id=${encodeURIComponent(runId)}`);
  }

  listRules(blockId: string): Promise<RuleDoc[]> {
    return this.request("GET", `/blocks/${blockId}/rules`);
  }

  putRule(blockId: string, ruleId: string, doc: Record<string, unknown>): Promise<RuleDoc> {
    return this.request("PUT", `/blocks/${blockId}/rules/${ruleId}`, doc);
  }

  deleteRule(blockId: string, ruleId: string): Promise<unknown> {
    return this.request("DELETE", `/blocks/${blockId}/rules/${ruleId}`);
  }

  predict(blockId: string, features: Record<string, number>): Promise<PredictDoc> {
    return this.request("POST", `/blocks/${blockId}/predict`, { features });
  }

  explain(
    target: string,
    method: string,
    features: Record<string, number>,
    options: { target_class?: string; n_samples?: number | string; seed?: number } = {},
  ): Promise<ExplanationDoc> {
    const path = target === "pipeline"
      ? `/pipeline/explain/${method}`
      : `/blocks/${target}/explain/${method}`;
    return this.request("POST", path, { features, ...options });
  }

  trainingRows(blockId: string, offset = 0, limit = 20): Promise<TrainingSliceDoc> {
    return this.request("GET", `/blocks/${blockId}/training?offset=${offset}&limit=${limit}`);
  }

  retrain(
    blockId: string,
    relabels: { row_index: number; new_label: string; old_label?: string }[],
    author = "ui",
  ): Promise<RetrainDoc> {
    return this.request("POST", `/blocks/${blockId}/retrain`, { relabels, author });
  }

  getOffsets(blockId: string): Promise<OffsetsDoc> {
    return this.request("GET", `/blocks/${blockId}/offsets`);
  }

  setOffsets(blockId: string, doc: OffsetsDoc): Promise<OffsetsDoc> {
    return this.request("PUT", `/blocks/${blockId}/offsets`, doc);
  }

  getStrategy(blockId: string): Promise<StrategyDoc> {
    return this.request("GET", `/blocks/${blockId}/strategy`);
  }

  getPredicate(blockId: string): Promise<PredicateDoc> {
    return this.request("GET", `/blocks/${blockId}/predicate`);
  }

  setPredicate(blockId: string, doc: PredicateDoc): Promise<PredicateDoc> {
    return this.request("PUT", `/blocks/${blockId}/predicate`, doc);
  }

  chat(message: string, conversationId?: string): Promise<ChatDoc> {
    const body: Record<string, unknown> = { message };
    if (conversationId) body.conversation_id = conversationId;
    return this.request("POST", "/chat", body);
  }
}
