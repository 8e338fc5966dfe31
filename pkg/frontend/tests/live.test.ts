import { describe, expect, it } from "vitest";
import {
  applyEvent,
  BACKOFF_CAP_MS,
  emptyModel,
  nextBackoffMs,
  parseEventLine,
} from "../src/live.js";
import type { EventLine } from "../src/types.js";

const CID = "c0001";

function kpi(trial: number, terminal: string, bits: number[]): EventLine {
  return {
    campaign_id: CID,
    kind: "Kpi",
    component: "HARNESS",
    agent_id: "harness",
    seq: trial + 1,
    tick: trial * 8,
    details: { trial, terminal, mutation_bits: bits },
  };
}

describe("parseEventLine", () => {
  it("parses a well-formed stream line", () => {
    const line = parseEventLine('{"kind":"CampaignStatus","id":"c0001","phase":"Running"}');
    expect(line).toMatchObject({ kind: "CampaignStatus", phase: "Running" });
  });

  it("returns null for malformed data instead of throwing", () => {
    expect(parseEventLine("not json")).toBeNull();
    expect(parseEventLine("")).toBeNull();
  });
});

describe("applyEvent", () => {
  it("tracks campaign phase and progress from status lines", () => {
    const model = emptyModel();
    applyEvent(model, {
      kind: "CampaignStatus",
      id: CID,
      phase: "Running",
      progress: { done: 3, total: 10 },
    }, CID);
    expect(model.phase).toBe("Running");
    expect(model.progress).toEqual({ done: 3, total: 10 });
  });

  it("ignores events for other campaigns", () => {
    const model = emptyModel();
    applyEvent(model, { kind: "CampaignStatus", id: "c0002", phase: "Done" }, CID);
    applyEvent(model, { ...kpi(1, "Rejected", [4]), campaign_id: "c0002" }, CID);
    expect(model.phase).toBe("Queued");
    expect(model.trials.size).toBe(0);
  });

  it("keys trial rows by trial index so replays are idempotent", () => {
    const model = emptyModel();
    const events = [kpi(0, "SessionActive", []), kpi(1, "Rejected", [3])];
    for (const e of events) applyEvent(model, e, CID);
    // simulate a reconnect replaying the full stream
    for (const e of events) applyEvent(model, e, CID);
    expect(model.trials.size).toBe(2);
    expect(model.trials.get(1)).toMatchObject({ terminal: "Rejected", mutationBits: [3] });
  });

  it("updates the UE connection status from state transitions", () => {
    const model = emptyModel();
    applyEvent(model, {
      campaign_id: CID,
      kind: "StateTransition",
      component: "UE",
      details: { from: "Idle", to: "Registered" },
    }, CID);
    expect(model.connectionStatus).toBe("Registered");
  });

  it("records the attack type from markers and tracks duration", () => {
    const model = emptyModel();
    applyEvent(model, {
      campaign_id: CID,
      kind: "AttackMarker",
      component: "HARNESS",
      tick: 0,
      details: { marker: "start", scenario: "fuzz-rrc" },
    }, CID);
    applyEvent(model, kpi(5, "Rejected", [12]), CID);
    expect(model.attackType).toBe("fuzz-rrc");
    expect(model.duration).toBe(40);
  });
});

describe("nextBackoffMs", () => {
  it("doubles from 500ms and caps at 10s", () => {
    expect(nextBackoffMs(0)).toBe(500);
    expect(nextBackoffMs(1)).toBe(1000);
    expect(nextBackoffMs(2)).toBe(2000);
    expect(nextBackoffMs(10)).toBe(BACKOFF_CAP_MS);
    expect(nextBackoffMs(40)).toBe(BACKOFF_CAP_MS);
  });
});
