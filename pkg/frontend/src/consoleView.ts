/**
 * Consultation console view-model: query input with positioned syntax
 * errors, a results table, and a detail view that renders the stored sheet
 * and sequencing tables, with a simulate action feeding back into it.
 *
 * Pure logic over an injected API surface; rendering targets structured rows
 * and text lines, which the DOM layer (or a test) consumes.
 */
import {
  QueryResponse,
  ScenarioDocument,
  ScenarioSummary,
  Selection,
  SimulateResponse,
} from "./contracts.js";
import { ApiError, SimulateRequest } from "./api.js";
import { simulationLines, tableLines } from "./tables.js";

/** The slice of the API client the console needs (stub-friendly). */
export interface ConsoleApi {
  query(text: string, projection?: string[]): Promise<QueryResponse>;
  listScenarios(filter?: {
    status?: string;
    q?: string;
  }): Promise<{ scenarios: ScenarioSummary[] }>;
  getScenario(id: string): Promise<ScenarioDocument>;
  simulate(id: string, request?: SimulateRequest): Promise<SimulateResponse>;
}

export interface QueryRow {
  id: string;
  title: string;
  status: string;
  stars: string[];
}

export interface SyntaxIssue {
  message: string;
  line: number | null;
  column: number | null;
}

export type QueryOutcome =
  | { kind: "rows"; rows: QueryRow[]; count: number; explain: string }
  | { kind: "syntax-error"; issue: SyntaxIssue }
  | { kind: "error"; code: string; message: string };

const POSITION = /line (\d+), column (\d+)/;

export function syntaxIssueFrom(message: string): SyntaxIssue {
  const match = POSITION.exec(message);
  return {
    message,
    line: match ? Number(match[1]) : null,
    column: match ? Number(match[2]) : null,
  };
}

export class ConsultationConsole {
  constructor(private readonly api: ConsoleApi) {}

  /** Run a query; an empty text lists the whole archive (match-all). */
  async runQuery(text: string): Promise<QueryOutcome> {
    try {
      const response = await this.api.query(text, [
        "id",
        "title",
        "status",
        "stars",
      ]);
      const rows: QueryRow[] = response.hits.map((hit) => ({
        id: String(hit["id"] ?? ""),
        title: String(hit["title"] ?? ""),
        status: String(hit["status"] ?? ""),
        stars: Array.isArray(hit["stars"]) ? hit["stars"].map(String) : [],
      }));
      return {
        kind: "rows",
        rows,
        count: response.count,
        explain: response.explain,
      };
    } catch (error) {
      if (error instanceof ApiError) {
        if (error.code === "syntax-error") {
          return { kind: "syntax-error", issue: syntaxIssueFrom(error.message) };
        }
        return { kind: "error", code: error.code, message: error.message };
      }
      throw error;
    }
  }

  /** Detail view of one scenario: sheet lines plus stored sequencing tables. */
  async scenarioDetail(id: string): Promise<string[]> {
    const doc = await this.api.getScenario(id);
    return renderDocument(doc);
  }

  /** Run a simulation and render it for the detail view. */
  async simulateInto(
    id: string,
    request: SimulateRequest = {},
  ): Promise<{ lines: string[]; truncated: boolean; response: SimulateResponse }> {
    const response = await this.api.simulate(id, request);
    return {
      lines: simulationLines(response),
      truncated: response.truncated,
      response,
    };
  }
}

function selectionText(value: Selection): string {
  if ("code" in value) {
    return `${value.code}: ${value.description}`;
  }
  const star = value.key_concept ? " *" : "";
  const count = value.count !== undefined ? ` (x${value.count})` : "";
  return `${value.instance}${star}${count}`;
}

export function renderDocument(doc: ScenarioDocument): string[] {
  const lines = [
    `${doc.id} — ${doc.sheet.title} [${doc.meta.status}]`,
    ...(doc.sheet.system ? [`system: ${doc.sheet.system}`] : []),
  ];
  for (const [parameter, values] of Object.entries(doc.sheet.parameters)) {
    lines.push(`${parameter}: ${values.map(selectionText).join("; ")}`);
  }
  if (doc.net) {
    lines.push(
      `net: ${doc.net.places.length} places, ${doc.net.transitions.length} transitions` +
        (doc.net.critical ? `, critical when ${doc.net.critical}` : ""),
    );
  }
  doc.tables.forEach((table, i) => {
    lines.push(...tableLines(table, i));
  });
  return lines;
}
