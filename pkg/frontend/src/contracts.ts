/**
 * Runtime contracts for every API payload the UI consumes or produces.
 *
 * These schemas are the single source of truth for the wire shapes: the API
 * client parses every response through them, and the contract test suite
 * checks them against fixtures recorded from a live server, so a drifting
 * backend fails loudly instead of rendering nonsense.
 */
import { z } from "zod";

export const PARAMETER_IDS = [
  "geographical-principle",
  "risks",
  "risk-linked-functions",
  "geographical-areas",
  "actors",
  "incidental-functions",
  "summarized-failures",
  "interim-solutions",
] as const;

export type ParameterId = (typeof PARAMETER_IDS)[number];
export const parameterId = z.enum(PARAMETER_IDS);

export const errorEnvelope = z.object({
  code: z.string(),
  message: z.string(),
  details: z.array(z.string()),
});
export type ErrorEnvelope = z.infer<typeof errorEnvelope>;

export const health = z.object({
  status: z.literal("ok"),
  version: z.string(),
  documents: z.number().int().nonnegative(),
  ontology_version: z.string(),
});
export type Health = z.infer<typeof health>;

// --- ontology ----------------------------------------------------------------

const treeInstance = z.object({
  id: z.string(),
  label: z.string(),
  note: z.string().nullable(),
});

export interface TreeNode {
  id: string;
  label: string;
  layer: "generic" | "domain";
  instances: z.infer<typeof treeInstance>[];
  children: TreeNode[];
}

export const treeNode: z.ZodType<TreeNode> = z.lazy(() =>
  z.object({
    id: z.string(),
    label: z.string(),
    layer: z.enum(["generic", "domain"]),
    instances: z.array(treeInstance),
    children: z.array(treeNode),
  }),
);

export const ontologyTree = z.object({
  version: z.string(),
  tree: z.array(treeNode),
});
export type OntologyTree = z.infer<typeof ontologyTree>;

export const vocabularyInstance = z.object({
  id: z.string(),
  label: z.string(),
  concept: z.string(),
  note: z.string().nullable(),
});
export type VocabularyInstance = z.infer<typeof vocabularyInstance>;

export const conceptInstances = z.object({
  concept: z.string(),
  transitive: z.boolean(),
  instances: z.array(vocabularyInstance),
});
export type ConceptInstances = z.infer<typeof conceptInstances>;

// --- scenario documents --------------------------------------------------------

export const instanceSelection = z.object({
  instance: z.string(),
  key_concept: z.boolean(),
  count: z.number().int().positive().optional(),
});
export type InstanceSelection = z.infer<typeof instanceSelection>;

export const codedSelection = z.object({
  code: z.string().regex(/^[A-Z]{2}[0-9]+$/),
  description: z.string().min(1),
});
export type CodedSelection = z.infer<typeof codedSelection>;

export const selection = z.union([instanceSelection, codedSelection]);
export type Selection = z.infer<typeof selection>;

export const marking = z.record(z.string(), z.number().int().nonnegative());
export type Marking = z.infer<typeof marking>;

export const sequencingRow = z.object({
  transition: z.string(),
  situation: z.string(),
  marking,
});
export type SequencingRow = z.infer<typeof sequencingRow>;

export const sequencingTable = z.object({
  critical: z.boolean(),
  initial: marking,
  rows: z.array(sequencingRow),
});
export type SequencingTable = z.infer<typeof sequencingTable>;

export const scenarioNet = z.object({
  places: z.array(
    z.object({ id: z.string(), label: z.string(), aspect: z.string() }),
  ),
  transitions: z.array(
    z.object({
      id: z.string(),
      label: z.string(),
      aspect: z.string(),
      guard: z.string(),
    }),
  ),
  arcs: z.array(
    z.object({
      source: z.string(),
      target: z.string(),
      weight: z.number().int().positive(),
    }),
  ),
  initial: marking,
  critical: z.string().nullable(),
});
export type ScenarioNet = z.infer<typeof scenarioNet>;

export const scenarioDocument = z.object({
  id: z.string(),
  meta: z.object({
    author: z.string(),
    created: z.string().nullable(),
    modified: z.string().nullable(),
    status: z.enum(["draft", "validated"]),
    ontology_version: z.string(),
  }),
  sheet: z.object({
    title: z.string(),
    narrative: z.string(),
    system: z.string(),
    parameters: z.record(parameterId, z.array(selection)),
  }),
  net: scenarioNet.nullable(),
  tables: z.array(sequencingTable),
});
export type ScenarioDocument = z.infer<typeof scenarioDocument>;

export const scenarioSummary = z.object({
  id: z.string(),
  title: z.string(),
  status: z.string(),
  modified: z.string().nullable(),
  system: z.string(),
  stars: z.array(z.string()),
});
export type ScenarioSummary = z.infer<typeof scenarioSummary>;

export const scenarioList = z.object({
  scenarios: z.array(scenarioSummary),
});
export type ScenarioList = z.infer<typeof scenarioList>;

export const created = z.object({ id: z.string() });

// --- validation and simulation ---------------------------------------------------

export const finding = z.object({
  level: z.enum(["error", "warning"]),
  where: z.string(),
  message: z.string(),
});
export type Finding = z.infer<typeof finding>;

export const validationReport = z.object({
  id: z.string(),
  ok: z.boolean(),
  errors: z.number().int().nonnegative(),
  warnings: z.number().int().nonnegative(),
  findings: z.array(finding),
});
export type ValidationReport = z.infer<typeof validationReport>;

export const simulateResponse = z.object({
  id: z.string(),
  predicate: z.string(),
  truncated: z.boolean(),
  reasons: z.array(
    z.enum(["max-markings", "token-cap", "max-depth", "time-budget"]),
  ),
  markings_explored: z.number().int().nonnegative(),
  edges_explored: z.number().int().nonnegative(),
  tables: z.array(sequencingTable),
});
export type SimulateResponse = z.infer<typeof simulateResponse>;

// --- query ------------------------------------------------------------------------

export const queryResponse = z.object({
  count: z.number().int().nonnegative(),
  ids: z.array(z.string()),
  hits: z.array(z.record(z.string(), z.unknown())),
  used_index: z.boolean(),
  explain: z.string(),
});
export type QueryResponse = z.infer<typeof queryResponse>;
