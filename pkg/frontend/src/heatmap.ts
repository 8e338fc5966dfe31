import type { PerBitEntry } from "./types.js";

// Per-bit vulnerability heatmap: 26 byte-rows x 8 bit-columns. Scores
// come straight from the API payload; the only client-side data is the
// static frame layout table used for tooltips.

export interface HeatmapCell {
  bit: number;
  byte: number;
  bitInByte: number;
  fieldName: string;
  score: number | null;
  flipped: number;
  success: number;
}

export const GRID_ROWS = 26;
export const GRID_COLS = 8;

const FIELD_SPANS: Array<[number, number, string]> = [
  [0, 8, "msg_type"],
  [8, 12, "tid"],
  [12, 16, "plmn_index"],
  [16, 24, "establishment_cause"],
  [24, 32, "registration_type"],
  [32, 96, "suci"],
  [96, 112, "sec_caps"],
  [112, 120, "nas_msg_type"],
  [120, 128, "nas_key_set_id"],
  [128, 160, "slice_id"],
  [160, 176, "ue_caps"],
  [176, 192, "reserved"],
  [192, 208, "length"],
];

export function fieldNameForBit(bit: number): string {
  for (const [lo, hi, name] of FIELD_SPANS) {
    if (bit >= lo && bit < hi) return name;
  }
  throw new RangeError(`bit ${bit} out of range`);
}

export function buildHeatmap(perBit: PerBitEntry[]): HeatmapCell[] {
  const byBit = new Map(perBit.map((e) => [e.bit, e]));
  const cells: HeatmapCell[] = [];
  for (let bit = 0; bit < GRID_ROWS * GRID_COLS; bit++) {
    const entry = byBit.get(bit);
    cells.push({
      bit,
      byte: Math.floor(bit / 8),
      bitInByte: bit % 8,
      fieldName: fieldNameForBit(bit),
      score: entry?.score ?? null,
      flipped: entry?.flipped ?? 0,
      success: entry?.success ?? 0,
    });
  }
  return cells;
}

// Cell color is a pure function of score: red (0, always fails) through
// green (100, always survives); untested bits render neutral.
export function colorForScore(score: number | null): string {
  if (score === null) return "#d9d9d9";
  const clamped = Math.max(0, Math.min(100, score));
  const hue = (clamped / 100) * 120;
  return `hsl(${hue}, 75%, 45%)`;
}

export function cellTooltip(cell: HeatmapCell): string {
  const score = cell.score === null ? "untested" : `score ${cell.score}`;
  return (
    `bit ${cell.bit} (byte ${cell.byte}, bit ${cell.bitInByte})\n` +
    `field ${cell.fieldName}\n` +
    `flipped ${cell.flipped}, survived ${cell.success}, ${score}`
  );
}

export function renderHeatmap(container: HTMLElement, cells: HeatmapCell[]): void {
  container.innerHTML = "";
  container.classList.add("heatmap");
  for (const cell of cells) {
    const div = document.createElement("div");
    div.className = "heatmap-cell";
    div.dataset.bit = String(cell.bit);
    div.style.backgroundColor = colorForScore(cell.score);
    div.title = cellTooltip(cell);
    container.appendChild(div);
  }
}
