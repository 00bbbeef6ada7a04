/**
 * Browser entry point: wires the acquisition wizard and the consultation
 * console to the DOM. All behaviour lives in the imported modules; this file
 * only builds elements and forwards events.
 */
import { ApiClient, ApiError } from "./api.js";
import { PARAMETER_IDS, ParameterId, VocabularyInstance } from "./contracts.js";
import {
  ANCHOR_CONCEPTS,
  AcquisitionWizard,
  WizardVocabulary,
} from "./wizard.js";
import { DraftStore } from "./storage.js";
import { ConsultationConsole } from "./consoleView.js";
import { clear, el, text } from "./dom.js";

async function fetchVocabulary(api: ApiClient): Promise<WizardVocabulary> {
  const entries = await Promise.all(
    PARAMETER_IDS.map(async (parameter) => {
      const body = await api.conceptInstances(ANCHOR_CONCEPTS[parameter], true);
      return [parameter, body.instances] as [ParameterId, VocabularyInstance[]];
    }),
  );
  return Object.fromEntries(entries) as WizardVocabulary;
}

function wizardPanel(
  wizard: AcquisitionWizard,
  drafts: DraftStore,
  api: ApiClient,
): HTMLElement {
  const root = el("section", { class: "wizard" });
  const status = el("p", { class: "status" });

  const persist = () => drafts.save(wizard.snapshot());

  const render = () => {
    clear(root);
    const step = wizard.currentStep();
    const header = el("h2", {}, [
      `Step ${wizard.stepIndex() + 1}/8 — ${step.title}`,
    ]);
    const list = el("ul", { class: "options" });
    for (const option of wizard.optionsFor(step.parameter)) {
      const checkbox = el("input", {
        type: step.single ? "radio" : "checkbox",
        name: step.parameter,
      }) as HTMLInputElement;
      checkbox.checked = wizard.isSelected(step.parameter, option.id);
      checkbox.addEventListener("change", () => {
        wizard.toggle(step.parameter, option.id);
        persist();
        render();
      });
      const starBox = el("input", { type: "checkbox", title: "key concept" }) as HTMLInputElement;
      starBox.checked = wizard
        .selected(step.parameter)
        .some((p) => p.instance === option.id && p.keyConcept);
      starBox.disabled = !wizard.isSelected(step.parameter, option.id);
      starBox.addEventListener("change", () => {
        wizard.setKeyConcept(step.parameter, option.id, starBox.checked);
        persist();
      });
      const item = el("li", {}, [
        el("label", {}, [checkbox, ` ${option.label}`]),
        starBox,
        el("span", { class: "star-mark" }, [" *"]),
      ]);
      if (step.allowsCount && wizard.isSelected(step.parameter, option.id)) {
        const count = el("input", {
          type: "number",
          min: "1",
          value: String(
            wizard
              .selected(step.parameter)
              .find((p) => p.instance === option.id)?.count ?? 1,
          ),
        }) as HTMLInputElement;
        count.addEventListener("change", () => {
          wizard.setCount(step.parameter, option.id, Number(count.value));
          persist();
        });
        item.append(count);
      }
      list.append(item);
    }

    const controls = el("div", { class: "controls" });
    if (step.allowsCodes) {
      const codeInput = el("input", { placeholder: "code (e.g. OO26)" }) as HTMLInputElement;
      const descInput = el("input", { placeholder: "description" }) as HTMLInputElement;
      const add = el("button", {}, ["add code"]);
      add.addEventListener("click", () => {
        try {
          wizard.addCode(step.parameter, codeInput.value.trim(), descInput.value);
          persist();
          render();
        } catch (error) {
          status.textContent = String(error instanceof Error ? error.message : error);
        }
      });
      const codes = el("ul", {},
        wizard.codedEntries(step.parameter).map((c) =>
          el("li", {}, [`${c.code}: ${c.description}`]),
        ),
      );
      controls.append(codeInput, descInput, add, codes);
    }

    const prev = el("button", {}, ["back"]);
    prev.addEventListener("click", () => {
      wizard.previous();
      persist();
      render();
    });
    const next = el("button", {}, ["next"]);
    next.addEventListener("click", () => {
      wizard.next();
      persist();
      render();
    });

    const idInput = el("input", { placeholder: "scenario id", value: wizard.scenarioId }) as HTMLInputElement;
    idInput.addEventListener("change", () => {
      wizard.setScenarioId(idInput.value.trim());
      persist();
    });
    const titleInput = el("input", { placeholder: "title", value: wizard.title }) as HTMLInputElement;
    titleInput.addEventListener("change", () => {
      wizard.setTitle(titleInput.value);
      persist();
    });
    const narrative = el("textarea", { placeholder: "narrative" }) as HTMLTextAreaElement;
    narrative.value = wizard.narrative;
    narrative.addEventListener("change", () => {
      wizard.setNarrative(narrative.value);
      persist();
    });
    const systemInput = el("input", { placeholder: "transport system", value: wizard.system }) as HTMLInputElement;
    systemInput.addEventListener("change", () => {
      wizard.setSystem(systemInput.value);
      persist();
    });

    const submit = el("button", { class: "submit" }, ["submit scenario"]);
    submit.addEventListener("click", async () => {
      const missing = wizard.incompleteSteps();
      if (missing.length) {
        status.textContent = `incomplete: ${missing.join(", ")}`;
        wizard.goTo(PARAMETER_IDS.indexOf(missing[0] as ParameterId));
        render();
        return;
      }
      try {
        const id = await api.createScenario(wizard.buildDocument());
        const report = await api.validateScenario(id);
        status.textContent = report.ok
          ? `saved '${id}' — validation clean (${report.warnings} warning(s))`
          : `saved '${id}' with ${report.errors} validation error(s)`;
        if (report.ok) {
          drafts.clear();
          wizard.reset();
          render();
        } else {
          const byStep = wizard.findingsByStep(report);
          const [firstStep] = [...byStep.keys()].filter((s) => s >= 0).sort();
          if (firstStep !== undefined) {
            wizard.goTo(firstStep);
            render();
            status.textContent = `step ${firstStep + 1}: ${byStep.get(firstStep)?.join("; ")}`;
          }
        }
      } catch (error) {
        status.textContent =
          error instanceof ApiError
            ? `${error.code}: ${error.message}`
            : String(error);
      }
    });

    root.append(
      header,
      el("div", { class: "meta-fields" }, [idInput, titleInput, systemInput, narrative]),
      list,
      controls,
      el("div", { class: "nav" }, [prev, next, submit]),
      status,
    );
  };

  render();
  return root;
}

function consolePanel(consoleModel: ConsultationConsole): HTMLElement {
  const root = el("section", { class: "console" });
  const input = el("input", {
    class: "query",
    placeholder: 'query, e.g. risks isa "collision"',
  }) as HTMLInputElement;
  const run = el("button", {}, ["run"]);
  const output = el("div", { class: "output" });
  const detail = el("div", { class: "detail" });

  run.addEventListener("click", async () => {
    clear(output);
    const outcome = await consoleModel.runQuery(input.value);
    if (outcome.kind === "syntax-error") {
      const where =
        outcome.issue.line !== null
          ? ` at line ${outcome.issue.line}, column ${outcome.issue.column}`
          : "";
      output.append(el("p", { class: "error" }, [`syntax error${where}: ${outcome.issue.message}`]));
      return;
    }
    if (outcome.kind === "error") {
      output.append(el("p", { class: "error" }, [`${outcome.code}: ${outcome.message}`]));
      return;
    }
    const table = el("table", {}, [
      el("tr", {}, [
        el("th", {}, ["id"]),
        el("th", {}, ["title"]),
        el("th", {}, ["status"]),
        el("th", {}, ["key concepts"]),
      ]),
    ]);
    for (const row of outcome.rows) {
      const link = el("a", { href: "#" }, [row.id]);
      link.addEventListener("click", async (event) => {
        event.preventDefault();
        clear(detail);
        detail.append(text(await consoleModel.scenarioDetail(row.id)));
        const predicate = el("input", { placeholder: "critical predicate (optional)" }) as HTMLInputElement;
        const simulate = el("button", {}, ["simulate"]);
        simulate.addEventListener("click", async () => {
          try {
            const result = await consoleModel.simulateInto(
              row.id,
              predicate.value ? { predicate: predicate.value } : {},
            );
            detail.append(text(result.lines));
            if (result.truncated) {
              detail.append(el("p", { class: "warn" }, ["exploration truncated"]));
            }
          } catch (error) {
            detail.append(
              el("p", { class: "error" }, [
                error instanceof ApiError ? `${error.code}: ${error.message}` : String(error),
              ]),
            );
          }
        });
        detail.append(predicate, simulate);
      });
      table.append(
        el("tr", {}, [
          el("td", {}, [link]),
          el("td", {}, [row.title]),
          el("td", {}, [row.status]),
          el("td", {}, [row.stars.join(", ")]),
        ]),
      );
    }
    output.append(
      el("p", {}, [`${outcome.count} result(s)`]),
      table,
    );
  });

  root.append(el("h2", {}, ["Consultation"]), input, run, output, detail);
  return root;
}

async function boot(): Promise<void> {
  const api = new ApiClient({ baseUrl: resolveBaseUrl() });
  const app = document.getElementById("app");
  if (!app) throw new Error("missing #app mount point");

  try {
    await api.health();
  } catch (error) {
    app.append(
      el("p", { class: "error" }, [
        `API unreachable: ${error instanceof Error ? error.message : error}. `,
      ]),
    );
    const retry = el("button", {}, ["retry"]);
    retry.addEventListener("click", () => {
      clear(app as HTMLElement);
      void boot();
    });
    app.append(retry);
    return;
  }

  const vocabulary = await fetchVocabulary(api);
  const wizard = new AcquisitionWizard(vocabulary);
  const drafts = new DraftStore(window.localStorage);
  const saved = drafts.load();
  if (saved) wizard.restore(saved);

  app.append(
    el("h1", {}, ["Accident scenario archive"]),
    wizardPanel(wizard, drafts, api),
    consolePanel(new ConsultationConsole(api)),
  );
}

function resolveBaseUrl(): string {
  const meta = document.querySelector('meta[name="railsafe-api"]');
  return meta?.getAttribute("content") ?? "http://127.0.0.1:8000";
}

void boot();
