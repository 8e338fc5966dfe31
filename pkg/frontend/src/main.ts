import { ApiClient, ApiError } from "./api.js";
import {
  CampaignForm,
  defaultForm,
  isSubmittable,
  toManifest,
  validateForm,
  visibleFields,
} from "./form.js";
import { buildHeatmap, renderHeatmap } from "./heatmap.js";
import { applyEvent, emptyModel, LiveFeed, LiveMetricsModel } from "./live.js";
import type { EventLine } from "./types.js";

// DOM wiring only; all displayable state lives in the form/live/heatmap
// modules so it stays unit-testable.

const api = new ApiClient();

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const form: CampaignForm = defaultForm();
let campaignId: string | null = null;
let model: LiveMetricsModel = emptyModel();
let feed: LiveFeed | null = null;
let pollTimer: ReturnType<typeof setInterval> | null = null;

const FIELD_IDS: Record<string, keyof CampaignForm> = {
  "field-scenario": "scenario",
  "field-trials": "trials",
  "field-bits": "bitsPerTrial",
  "field-seed": "seed",
  "field-exhaustive": "exhaustive",
  "field-cipher": "cipher",
  "field-flood": "flood",
  "field-legit": "legit",
  "field-capacity": "capacity",
};

function readForm(): void {
  for (const [id, key] of Object.entries(FIELD_IDS)) {
    const input = el<HTMLInputElement>(id);
    if (input instanceof HTMLSelectElement || input.type === "text" || input.type === "number") {
      if (key === "scenario") {
        form.scenario = input.value === "dos-flood" ? "dos-flood" : "fuzz-rrc";
      } else {
        (form as unknown as Record<string, number>)[key] = Number(input.value);
      }
    } else if (input.type === "checkbox") {
      (form as unknown as Record<string, boolean>)[key] = input.checked;
    }
  }
}

function refreshForm(): void {
  const visible = new Set(visibleFields(form.scenario));
  for (const [id, key] of Object.entries(FIELD_IDS)) {
    const row = el(id).closest(".form-row") as HTMLElement | null;
    if (row) row.hidden = !visible.has(key);
  }
  const errors = validateForm(form);
  el("form-errors").textContent = errors.join("; ");
  el<HTMLButtonElement>("submit").disabled = !isSubmittable(form);
}

function renderLive(): void {
  el("live-phase").textContent = model.phase;
  el("live-connection").textContent = model.connectionStatus;
  el("live-attack").textContent = model.attackType || "-";
  el("live-duration").textContent = `${model.duration} ticks`;
  const bar = el<HTMLProgressElement>("live-progress");
  bar.max = Math.max(1, model.progress.total);
  bar.value = model.progress.done;
  el("live-progress-text").textContent =
    `${model.progress.done} / ${model.progress.total}`;

  const body = el("trial-rows");
  body.innerHTML = "";
  const rows = [...model.trials.values()].sort((a, b) => a.trial - b.trial);
  for (const row of rows.slice(-50)) {
    const tr = document.createElement("tr");
    tr.innerHTML =
      `<td>${row.trial}</td><td>${row.terminal}</td>` +
      `<td>${row.mutationBits.join(", ") || "-"}</td>`;
    body.appendChild(tr);
  }
}

async function refreshHeatmap(): Promise<void> {
  if (!campaignId) return;
  const container = el("heatmap");
  const empty = el("heatmap-empty");
  try {
    const payload = await api.getPerBit(campaignId);
    empty.hidden = true;
    container.hidden = false;
    renderHeatmap(container, buildHeatmap(payload.per_bit));
  } catch (err) {
    container.hidden = true;
    empty.hidden = false;
    empty.textContent =
      err instanceof ApiError && err.status === 409
        ? "Per-bit results are available once the campaign finishes."
        : `Per-bit results unavailable: ${String(err)}`;
  }
}

function onEvent(line: EventLine): void {
  if (!campaignId) return;
  model = applyEvent(model, line, campaignId);
  renderLive();
  if (line.kind === "CampaignStatus" && line.id === campaignId &&
      (line.phase === "Done" || line.phase === "Failed")) {
    void refreshHeatmap();
  }
}

async function pollStatus(): Promise<void> {
  if (!campaignId) return;
  try {
    const status = await api.getStatus(campaignId);
    model.phase = status.phase;
    model.progress = status.progress;
    renderLive();
    if (status.phase === "Done" || status.phase === "Failed") {
      if (pollTimer) clearInterval(pollTimer);
      pollTimer = null;
      void refreshHeatmap();
    }
  } catch {
    // transient; the next poll or SSE line will catch us up
  }
}

async function submit(): Promise<void> {
  readForm();
  if (!isSubmittable(form)) return;
  el<HTMLButtonElement>("submit").disabled = true;
  try {
    campaignId = await api.submitCampaign(toManifest(form));
    el("campaign-id").textContent = campaignId;
    model = emptyModel();
    renderLive();
    el("heatmap").hidden = true;
    el("heatmap-empty").hidden = false;
    el("heatmap-empty").textContent =
      "Per-bit results are available once the campaign finishes.";
    feed?.stop();
    feed = new LiveFeed(api.eventsUrl(), {
      onEvent,
      onConnectionChange: (online) => {
        el("offline-banner").hidden = online;
      },
    });
    feed.start();
    if (pollTimer) clearInterval(pollTimer);
    pollTimer = setInterval(() => void pollStatus(), 1000);
  } catch (err) {
    el("form-errors").textContent = `submit failed: ${String(err)}`;
  } finally {
    refreshForm();
  }
}

function init(): void {
  for (const id of Object.keys(FIELD_IDS)) {
    el(id).addEventListener("input", () => {
      readForm();
      refreshForm();
    });
  }
  el("submit").addEventListener("click", () => void submit());
  refreshForm();
  void api
    .getHealth()
    .then(() => {
      el("offline-banner").hidden = true;
    })
    .catch(() => {
      el("offline-banner").hidden = false;
    });
}

document.addEventListener("DOMContentLoaded", init);
