import type { CampaignProgress, EventLine } from "./types.js";

// Live campaign view model, updated only from the /api/events stream.
// Trial rows are keyed by trial index so a reconnect replaying events
// never duplicates them.

export interface TrialRow {
  trial: number;
  terminal: string;
  mutationBits: number[];
}

export interface LiveMetricsModel {
  connectionStatus: string;
  attackType: string;
  duration: number;
  phase: string;
  progress: CampaignProgress;
  trials: Map<number, TrialRow>;
}

export function emptyModel(): LiveMetricsModel {
  return {
    connectionStatus: "Idle",
    attackType: "",
    duration: 0,
    phase: "Queued",
    progress: { done: 0, total: 0 },
    trials: new Map(),
  };
}

export function applyEvent(
  model: LiveMetricsModel,
  line: EventLine,
  campaignId: string,
): LiveMetricsModel {
  if (line.kind === "CampaignStatus") {
    if (line.id !== campaignId) return model;
    model.phase = line.phase ?? model.phase;
    model.progress = line.progress ?? model.progress;
    return model;
  }
  if (line.campaign_id !== campaignId) return model;
  const details = line.details ?? {};
  switch (line.kind) {
    case "StateTransition":
      if (line.component === "UE") {
        model.connectionStatus = String(details["to"] ?? model.connectionStatus);
      }
      break;
    case "AttackMarker":
      model.attackType = String(details["scenario"] ?? model.attackType);
      break;
    case "Kpi":
      if (line.component === "HARNESS" && details["trial"] !== undefined) {
        const trial = Number(details["trial"]);
        model.trials.set(trial, {
          trial,
          terminal: String(details["terminal"] ?? ""),
          mutationBits: (details["mutation_bits"] as number[]) ?? [],
        });
      }
      break;
  }
  if (typeof line.tick === "number" && line.tick > model.duration) {
    model.duration = line.tick;
  }
  return model;
}

export function parseEventLine(data: string): EventLine | null {
  try {
    return JSON.parse(data) as EventLine;
  } catch {
    return null;
  }
}

// Reconnect backoff: 500ms doubling to a 10s cap; resets on any message.
export const BACKOFF_BASE_MS = 500;
export const BACKOFF_CAP_MS = 10_000;

export function nextBackoffMs(attempt: number): number {
  return Math.min(BACKOFF_CAP_MS, BACKOFF_BASE_MS * 2 ** attempt);
}

export interface FeedCallbacks {
  onEvent: (line: EventLine) => void;
  onConnectionChange?: (online: boolean) => void;
}

export class LiveFeed {
  private source: EventSource | null = null;
  private attempt = 0;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private closed = false;

  constructor(
    private url: string,
    private callbacks: FeedCallbacks,
  ) {}

  start(): void {
    this.closed = false;
    this.connect();
  }

  private connect(): void {
    if (this.closed) return;
    this.source = new EventSource(this.url);
    this.source.onopen = () => {
      this.attempt = 0;
      this.callbacks.onConnectionChange?.(true);
    };
    this.source.onmessage = (msg) => {
      const line = parseEventLine(msg.data);
      if (line) this.callbacks.onEvent(line);
    };
    this.source.onerror = () => {
      this.callbacks.onConnectionChange?.(false);
      this.source?.close();
      this.timer = setTimeout(() => this.connect(), nextBackoffMs(this.attempt));
      this.attempt += 1;
    };
  }

  stop(): void {
    this.closed = true;
    if (this.timer) clearTimeout(this.timer);
    this.source?.close();
  }
}
