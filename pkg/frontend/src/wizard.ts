/**
 * Acquisition wizard state machine: the eight fact-sheet parameters as
 * ordered steps, selections restricted to server-fetched vocabulary.
 *
 * This module is pure state logic — no DOM, no network. The caller fetches
 * the vocabulary through the API client and hands it in; the wizard refuses
 * any instance id that did not arrive that way, so the UI cannot invent
 * values the archive would reject.
 */
import {
  CodedSelection,
  PARAMETER_IDS,
  ParameterId,
  ScenarioDocument,
  Selection,
  ValidationReport,
  VocabularyInstance,
} from "./contracts.js";

/** Per-parameter vocabulary as served by /ontology/concepts/{id}/instances. */
export type WizardVocabulary = Record<ParameterId, VocabularyInstance[]>;

export interface StepDescriptor {
  parameter: ParameterId;
  title: string;
  single: boolean;
  allowsCount: boolean;
  allowsCodes: boolean;
}

export interface PickedInstance {
  instance: string;
  keyConcept: boolean;
  count?: number;
}

export interface WizardSnapshot {
  scenarioId: string;
  title: string;
  narrative: string;
  system: string;
  step: number;
  picks: Partial<Record<ParameterId, PickedInstance[]>>;
  codes: Partial<Record<ParameterId, CodedSelection[]>>;
}

/** Ontology anchor concept for each parameter (instances fetched per anchor). */
export const ANCHOR_CONCEPTS: Record<ParameterId, string> = {
  "geographical-principle": "geographical-principle",
  risks: "risk",
  "risk-linked-functions": "risk-linked-function",
  "geographical-areas": "geographical-area",
  actors: "actor",
  "incidental-functions": "incidental-function",
  "summarized-failures": "summarized-failure",
  "interim-solutions": "interim-solution",
};

const STEP_TITLES: Record<ParameterId, string> = {
  "geographical-principle": "Geographical principle",
  risks: "Risks",
  "risk-linked-functions": "Functions linked to the risk",
  "geographical-areas": "Geographical areas",
  actors: "Actors",
  "incidental-functions": "Incidental functions",
  "summarized-failures": "Summarized failures",
  "interim-solutions": "Interim solutions",
};

const SINGLE: ReadonlySet<ParameterId> = new Set(["geographical-principle"]);
const COUNTED: ReadonlySet<ParameterId> = new Set(["actors"]);
const CODED: ReadonlySet<ParameterId> = new Set([
  "summarized-failures",
  "interim-solutions",
]);
const CODE_SHAPE = /^[A-Z]{2}[0-9]+$/;

export class WizardError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "WizardError";
  }
}

export class AcquisitionWizard {
  private readonly vocabulary: WizardVocabulary;
  private readonly allowed: Map<ParameterId, Set<string>>;
  private picks = new Map<ParameterId, PickedInstance[]>();
  private codes = new Map<ParameterId, CodedSelection[]>();
  private step = 0;
  scenarioId = "";
  title = "";
  narrative = "";
  system = "";
  dirty = false;

  constructor(vocabulary: WizardVocabulary) {
    this.vocabulary = vocabulary;
    this.allowed = new Map(
      PARAMETER_IDS.map((p) => [
        p,
        new Set((vocabulary[p] ?? []).map((i) => i.id)),
      ]),
    );
  }

  // --- steps -----------------------------------------------------------------

  steps(): StepDescriptor[] {
    return PARAMETER_IDS.map((parameter) => ({
      parameter,
      title: STEP_TITLES[parameter],
      single: SINGLE.has(parameter),
      allowsCount: COUNTED.has(parameter),
      allowsCodes: CODED.has(parameter),
    }));
  }

  currentStep(): StepDescriptor {
    const step = this.steps()[this.step];
    if (!step) throw new WizardError(`step ${this.step} out of range`);
    return step;
  }

  stepIndex(): number {
    return this.step;
  }

  goTo(index: number): void {
    if (index < 0 || index >= PARAMETER_IDS.length) {
      throw new WizardError(`step ${index} out of range`);
    }
    this.step = index;
  }

  next(): boolean {
    if (this.step + 1 >= PARAMETER_IDS.length) return false;
    this.step += 1;
    return true;
  }

  previous(): boolean {
    if (this.step === 0) return false;
    this.step -= 1;
    return true;
  }

  // --- vocabulary-bound selections ------------------------------------------------

  optionsFor(parameter: ParameterId): VocabularyInstance[] {
    return this.vocabulary[parameter] ?? [];
  }

  selected(parameter: ParameterId): PickedInstance[] {
    return [...(this.picks.get(parameter) ?? [])];
  }

  codedEntries(parameter: ParameterId): CodedSelection[] {
    return [...(this.codes.get(parameter) ?? [])];
  }

  isSelected(parameter: ParameterId, instanceId: string): boolean {
    return this.selected(parameter).some((p) => p.instance === instanceId);
  }

  /**
   * Select or deselect a vocabulary instance. Unknown ids are refused;
   * single-cardinality parameters replace the previous choice.
   */
  toggle(parameter: ParameterId, instanceId: string): void {
    if (!this.allowed.get(parameter)?.has(instanceId)) {
      throw new WizardError(
        `'${instanceId}' is not in the fetched vocabulary for ${parameter}`,
      );
    }
    const current = this.picks.get(parameter) ?? [];
    const existing = current.findIndex((p) => p.instance === instanceId);
    if (existing >= 0) {
      current.splice(existing, 1);
    } else if (SINGLE.has(parameter)) {
      current.length = 0;
      current.push({ instance: instanceId, keyConcept: false });
    } else {
      current.push({ instance: instanceId, keyConcept: false });
    }
    this.picks.set(parameter, current);
    this.dirty = true;
  }

  setKeyConcept(
    parameter: ParameterId,
    instanceId: string,
    flag: boolean,
  ): void {
    const pick = (this.picks.get(parameter) ?? []).find(
      (p) => p.instance === instanceId,
    );
    if (!pick) {
      throw new WizardError(`'${instanceId}' is not selected under ${parameter}`);
    }
    pick.keyConcept = flag;
    this.dirty = true;
  }

  setCount(parameter: ParameterId, instanceId: string, count: number): void {
    if (!COUNTED.has(parameter)) {
      throw new WizardError(`${parameter} takes no numeric qualifier`);
    }
    if (!Number.isInteger(count) || count < 1) {
      throw new WizardError(`count must be a positive integer, got ${count}`);
    }
    const pick = (this.picks.get(parameter) ?? []).find(
      (p) => p.instance === instanceId,
    );
    if (!pick) {
      throw new WizardError(`'${instanceId}' is not selected under ${parameter}`);
    }
    pick.count = count;
    this.dirty = true;
  }

  addCode(parameter: ParameterId, code: string, description: string): void {
    if (!CODED.has(parameter)) {
      throw new WizardError(`${parameter} takes no coded entries`);
    }
    if (!CODE_SHAPE.test(code)) {
      throw new WizardError(
        `'${code}' does not match the two-letters-then-digits code shape`,
      );
    }
    if (!description.trim()) {
      throw new WizardError("coded entries need a description");
    }
    const current = this.codes.get(parameter) ?? [];
    if (current.some((c) => c.code === code)) {
      throw new WizardError(`code '${code}' is already entered`);
    }
    current.push({ code, description });
    this.codes.set(parameter, current);
    this.dirty = true;
  }

  removeCode(parameter: ParameterId, code: string): void {
    const current = this.codes.get(parameter) ?? [];
    const at = current.findIndex((c) => c.code === code);
    if (at >= 0) {
      current.splice(at, 1);
      this.dirty = true;
    }
  }

  // --- metadata fields -------------------------------------------------------------

  setScenarioId(id: string): void {
    this.scenarioId = id;
    this.dirty = true;
  }

  setTitle(title: string): void {
    this.title = title;
    this.dirty = true;
  }

  setNarrative(narrative: string): void {
    this.narrative = narrative;
    this.dirty = true;
  }

  setSystem(system: string): void {
    this.system = system;
    this.dirty = true;
  }

  // --- document assembly -------------------------------------------------------------

  /** Steps that still have neither a selection nor a coded entry. */
  incompleteSteps(): ParameterId[] {
    return PARAMETER_IDS.filter(
      (p) =>
        (this.picks.get(p) ?? []).length === 0 &&
        (this.codes.get(p) ?? []).length === 0,
    );
  }

  /** The submission payload for POST /scenarios (always a draft). */
  buildDocument(): Record<string, unknown> {
    const parameters: Partial<Record<ParameterId, Selection[]>> = {};
    for (const parameter of PARAMETER_IDS) {
      const values: Selection[] = (this.picks.get(parameter) ?? []).map(
        (p) => ({
          instance: p.instance,
          key_concept: p.keyConcept,
          ...(p.count !== undefined ? { count: p.count } : {}),
        }),
      );
      for (const code of this.codes.get(parameter) ?? []) {
        values.push({ code: code.code, description: code.description });
      }
      if (values.length) parameters[parameter] = values;
    }
    return {
      id: this.scenarioId,
      meta: { author: "web-ui", status: "draft" },
      sheet: {
        title: this.title,
        narrative: this.narrative,
        system: this.system,
        parameters,
      },
    };
  }

  /**
   * Load an existing document into the wizard — the edit flow. Selections go
   * through the same vocabulary-checked mutators as hand-picked ones, so a
   * document referencing values outside the fetched vocabulary is refused.
   */
  loadDocument(doc: ScenarioDocument): void {
    this.reset();
    this.scenarioId = doc.id;
    this.title = doc.sheet.title;
    this.narrative = doc.sheet.narrative;
    this.system = doc.sheet.system;
    for (const [parameter, values] of Object.entries(doc.sheet.parameters) as [
      ParameterId,
      Selection[],
    ][]) {
      for (const value of values) {
        if ("code" in value) {
          this.addCode(parameter, value.code, value.description);
        } else {
          this.toggle(parameter, value.instance);
          if (value.key_concept) {
            this.setKeyConcept(parameter, value.instance, true);
          }
          if (value.count !== undefined) {
            this.setCount(parameter, value.instance, value.count);
          }
        }
      }
    }
    this.dirty = false;
  }

  /**
   * Map server validation findings onto wizard steps: the report's `where`
   * is the parameter id for vocabulary problems. Findings that belong to no
   * step (scenario id, narrative, …) land under -1.
   */
  findingsByStep(report: ValidationReport): Map<number, string[]> {
    const stepOf = new Map<string, number>(
      PARAMETER_IDS.map((p, index) => [p, index]),
    );
    const mapped = new Map<number, string[]>();
    for (const finding of report.findings) {
      if (finding.level !== "error") continue;
      const step = stepOf.get(finding.where) ?? -1;
      const bucket = mapped.get(step) ?? [];
      bucket.push(finding.message);
      mapped.set(step, bucket);
    }
    return mapped;
  }

  // --- draft persistence ----------------------------------------------------------

  snapshot(): WizardSnapshot {
    return {
      scenarioId: this.scenarioId,
      title: this.title,
      narrative: this.narrative,
      system: this.system,
      step: this.step,
      picks: Object.fromEntries(
        [...this.picks].map(([p, list]) => [p, list.map((x) => ({ ...x }))]),
      ),
      codes: Object.fromEntries(
        [...this.codes].map(([p, list]) => [p, list.map((x) => ({ ...x }))]),
      ),
    };
  }

  /** Restore a saved draft; selections outside the current vocabulary are dropped. */
  restore(snapshot: WizardSnapshot): void {
    this.scenarioId = snapshot.scenarioId;
    this.title = snapshot.title;
    this.narrative = snapshot.narrative;
    this.system = snapshot.system;
    this.step = Math.min(
      Math.max(0, snapshot.step),
      PARAMETER_IDS.length - 1,
    );
    this.picks = new Map();
    this.codes = new Map();
    for (const parameter of PARAMETER_IDS) {
      const saved = snapshot.picks[parameter] ?? [];
      const legal = saved.filter((p) =>
        this.allowed.get(parameter)?.has(p.instance),
      );
      if (legal.length) {
        this.picks.set(
          parameter,
          legal.map((x) => ({ ...x })),
        );
      }
      const codes = snapshot.codes[parameter] ?? [];
      if (codes.length && CODED.has(parameter)) {
        this.codes.set(
          parameter,
          codes.map((x) => ({ ...x })),
        );
      }
    }
    this.dirty = false;
  }

  /** Called after a successful submit: selections gone, vocabulary kept. */
  reset(): void {
    this.picks = new Map();
    this.codes = new Map();
    this.scenarioId = "";
    this.title = "";
    this.narrative = "";
    this.system = "";
    this.step = 0;
    this.dirty = false;
  }
}
