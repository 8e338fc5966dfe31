// Payload shapes of the operator HTTP API. The dashboard is a pure view:
// every displayed number originates from one of these payloads.

export type Scenario = "fuzz-rrc" | "dos-flood";

export interface CampaignProgress {
  done: number;
  total: number;
}

export interface CampaignStatus {
  id: string;
  phase: "Queued" | "Running" | "Done" | "Failed";
  progress: CampaignProgress;
  result_path: string | null;
}

export interface PerBitEntry {
  bit: number;
  flipped: number;
  success: number;
  score: number | null;
}

export interface PerBitPayload {
  per_bit: PerBitEntry[];
}

// One line from the /api/events stream. Agent events carry agent_id and
// kind; campaign status lines carry kind "CampaignStatus".
export interface EventLine {
  campaign_id?: string;
  kind?: string;
  component?: string;
  agent_id?: string;
  seq?: number;
  tick?: number;
  details?: Record<string, unknown>;
  // CampaignStatus fields
  id?: string;
  phase?: string;
  progress?: CampaignProgress;
}
