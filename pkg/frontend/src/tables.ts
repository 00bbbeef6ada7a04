/**
 * Sequencing-table rendering: ordered step lists with token deltas and a
 * critical badge, as structured rows plus plain-text lines. The console and
 * the scenario detail view both draw from this model; no graph drawing here.
 */
import { Marking, SequencingTable, SimulateResponse } from "./contracts.js";

export interface RenderedStep {
  /** 1-based position in the chronology. */
  index: number;
  transition: string;
  situation: string;
  marking: Marking;
  /** Human-readable token changes, e.g. "seg1 +1", "east-approach -1". */
  deltas: string[];
}

export interface RenderedTable {
  critical: boolean;
  initial: Marking;
  initialText: string;
  steps: RenderedStep[];
  finalText: string;
}

export function markingText(marking: Marking): string {
  const entries = Object.entries(marking)
    .filter(([, count]) => count > 0)
    .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0));
  if (!entries.length) return "(empty)";
  return entries.map(([place, count]) => `${place}=${count}`).join(" ");
}

function deltas(before: Marking, after: Marking): string[] {
  const places = new Set([...Object.keys(before), ...Object.keys(after)]);
  const out: string[] = [];
  for (const place of [...places].sort()) {
    const diff = (after[place] ?? 0) - (before[place] ?? 0);
    if (diff > 0) out.push(`${place} +${diff}`);
    else if (diff < 0) out.push(`${place} ${diff}`);
  }
  return out;
}

export function renderTable(table: SequencingTable): RenderedTable {
  const steps: RenderedStep[] = [];
  let previous = table.initial;
  table.rows.forEach((row, i) => {
    steps.push({
      index: i + 1,
      transition: row.transition,
      situation: row.situation,
      marking: row.marking,
      deltas: deltas(previous, row.marking),
    });
    previous = row.marking;
  });
  return {
    critical: table.critical,
    initial: table.initial,
    initialText: markingText(table.initial),
    steps,
    finalText: markingText(previous),
  };
}

/** Plain-text lines for one table, console style. */
export function tableLines(table: SequencingTable, index: number): string[] {
  const rendered = renderTable(table);
  const badge = rendered.critical ? " [CRITICAL]" : "";
  const lines = [
    `table ${index}${badge}`,
    `  initial | ${rendered.initialText}`,
  ];
  for (const step of rendered.steps) {
    const change = step.deltas.length ? ` (${step.deltas.join(", ")})` : "";
    const situation = step.situation ? ` — ${step.situation}` : "";
    lines.push(
      `  ${step.index}. ${step.transition} | ${markingText(step.marking)}${change}${situation}`,
    );
  }
  return lines;
}

/** Full console rendering of a simulate response. */
export function simulationLines(response: SimulateResponse): string[] {
  const lines = [
    `simulation of ${response.id}`,
    `  predicate: ${response.predicate}`,
    `  explored: ${response.markings_explored} markings, ${response.edges_explored} edges`,
  ];
  if (response.truncated) {
    lines.push(`  truncated: ${response.reasons.join(", ")}`);
  }
  if (!response.tables.length) {
    lines.push("  no critical situation reachable within the bounds");
  }
  response.tables.forEach((table, i) => {
    lines.push(...tableLines(table, i));
  });
  return lines;
}
