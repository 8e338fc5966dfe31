import type { CampaignStatus, PerBitPayload } from "./types.js";

// Thin fetch client for the operator HTTP API. Same-origin by default;
// a base URL can be injected for tests.

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export class ApiClient {
  constructor(private base = "") {}

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    const resp = await fetch(this.base + path, init);
    if (!resp.ok) {
      let detail = resp.statusText;
      try {
        const body = (await resp.json()) as { error?: string };
        if (body.error) detail = body.error;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(resp.status, detail);
    }
    return resp.json();
  }

  async getHealth(): Promise<{ status: string }> {
    return (await this.request("/api/health")) as { status: string };
  }

  async submitCampaign(manifest: object): Promise<string> {
    const body = (await this.request("/api/campaigns", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(manifest),
    })) as { id: string };
    return body.id;
  }

  async getStatus(id: string): Promise<CampaignStatus> {
    return (await this.request(`/api/campaigns/${id}`)) as CampaignStatus;
  }

  async getPerBit(id: string): Promise<PerBitPayload> {
    return (await this.request(`/api/campaigns/${id}/per-bit`)) as PerBitPayload;
  }

  eventsUrl(): string {
    return this.base + "/api/events";
  }
}
