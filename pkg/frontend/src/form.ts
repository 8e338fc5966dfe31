import type { Scenario } from "./types.js";

// Campaign configuration form model. Validation mirrors the server's
// manifest rules so invalid forms can never be submitted.

export interface CampaignForm {
  scenario: Scenario;
  trials: number;
  bitsPerTrial: number;
  seed: number;
  exhaustive: boolean;
  cipher: boolean;
  flood: number;
  legit: number;
  capacity: number;
}

export const FRAME_BITS = 208;

export function defaultForm(): CampaignForm {
  return {
    scenario: "fuzz-rrc",
    trials: 100,
    bitsPerTrial: 1,
    seed: 42,
    exhaustive: false,
    cipher: false,
    flood: 16,
    legit: 5,
    capacity: 16,
  };
}

export function validateForm(form: CampaignForm): string[] {
  const errors: string[] = [];
  if (!Number.isInteger(form.seed)) errors.push("seed must be an integer");
  if (form.scenario === "fuzz-rrc") {
    if (!form.exhaustive) {
      if (!Number.isInteger(form.trials) || form.trials < 1) {
        errors.push("trials must be a positive integer");
      }
      if (
        !Number.isInteger(form.bitsPerTrial) ||
        form.bitsPerTrial < 0 ||
        form.bitsPerTrial > FRAME_BITS
      ) {
        errors.push(`bits per trial must be in 0..${FRAME_BITS}`);
      }
    }
  } else {
    if (!Number.isInteger(form.flood) || form.flood < 0) {
      errors.push("flood count must be >= 0");
    }
    if (!Number.isInteger(form.legit) || form.legit < 1) {
      errors.push("legitimate attempts must be >= 1");
    }
    if (!Number.isInteger(form.capacity) || form.capacity < 0) {
      errors.push("context capacity must be >= 0");
    }
  }
  return errors;
}

export function isSubmittable(form: CampaignForm): boolean {
  return validateForm(form).length === 0;
}

// Fields that only make sense for one scenario; the form hides the rest.
export function visibleFields(scenario: Scenario): string[] {
  if (scenario === "dos-flood") {
    return ["scenario", "flood", "legit", "capacity", "seed"];
  }
  return ["scenario", "trials", "bitsPerTrial", "seed", "exhaustive", "cipher"];
}

export function toManifest(form: CampaignForm): object {
  if (form.scenario === "dos-flood") {
    return {
      campaign: { mode: "Random", seed: form.seed, scenario: "dos-flood" },
      ran: { context_capacity: form.capacity, context_expiry_ticks: 1000000 },
      dos: { flood_count: form.flood, legit_attempts: form.legit },
    };
  }
  return {
    campaign: {
      mode: form.exhaustive ? "Exhaustive" : "Random",
      trials: form.exhaustive ? FRAME_BITS : form.trials,
      bits_per_trial: form.exhaustive ? 1 : form.bitsPerTrial,
      seed: form.seed,
      cipher_enabled: form.cipher,
      scenario: "fuzz-rrc",
    },
  };
}
