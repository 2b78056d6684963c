// Chain builder: a catalog palette on the left, four phase lanes on the
// right. Dropping a technique into a lane creates a step whose phase is fixed
// by the lane, so phase-order violations cannot be constructed. Step editors
// are prefilled from catalog defaults; saving issues chain CRUD calls.

import { el } from "./dom";
import type { ChainDraft, DraftStep } from "./state";
import { draftProblems, stepCount } from "./state";
import type { CatalogDoc, Phase, Technique } from "./types";
import { MULTIPLIER_MAX, MULTIPLIER_STEP, PHASES } from "./types";

export interface BuilderHandlers {
  onDrop(techniqueId: string, phase: Phase): void;
  onRemoveStep(phase: Phase, index: number): void;
  onUpdateStep(phase: Phase, index: number,
               patch: Partial<Pick<DraftStep, "threat" | "exposure" | "multiplier" | "note">>): void;
  onMeta(patch: { id?: string; name?: string; description?: string;
                  impactLevel?: number; impactRationale?: string }): void;
  onSave(): void;
  onLoadChain(chainId: string): void;
  onNewDraft(): void;
  onDeleteChain(chainId: string): void;
}

export interface BuilderData {
  catalog: CatalogDoc;
  draft: ChainDraft;
  savedChainIds: string[];
}

export function renderBuilder(data: BuilderData, handlers: BuilderHandlers): HTMLElement {
  return el("div", { class: "builder" },
    renderPalette(data.catalog),
    el("div", { class: "builder-main" },
      renderChainBar(data, handlers),
      renderMeta(data.draft, handlers),
      el("div", { class: "lanes" },
        ...PHASES.map((phase) => renderLane(phase, data.draft, data.catalog, handlers))),
      renderSaveRow(data.draft, handlers),
    ),
  );
}

function renderPalette(catalog: CatalogDoc): HTMLElement {
  const palette = el("div", { class: "palette" }, el("h3", {}, "Techniques"));
  for (const technique of catalog.techniques) {
    const card = el("div", {
      class: "technique-card",
      draggable: "true",
      "data-technique": technique.id,
      title: `${technique.description}\nT=${technique.default_threat} E=${technique.default_exposure}`,
    },
      el("strong", {}, technique.name),
      el("span", { class: "muted" },
        ` ${technique.tactics.join(", ")} · T${technique.default_threat}/E${technique.default_exposure}`),
    );
    card.addEventListener("dragstart", (event) => {
      (event as DragEvent).dataTransfer?.setData("text/technique", technique.id);
    });
    palette.append(card);
  }
  if (!catalog.techniques.length) {
    palette.append(el("p", { class: "muted" }, "Catalog is empty — load one first."));
  }
  return palette;
}

function renderChainBar(data: BuilderData, handlers: BuilderHandlers): HTMLElement {
  const select = el("select", { class: "chain-select" },
    el("option", { value: "" }, "— saved chains —"),
    ...data.savedChainIds.map((id) => el("option", { value: id }, id)));
  select.addEventListener("change", () => {
    if (select.value) handlers.onLoadChain(select.value);
  });
  const bar = el("div", { class: "chain-bar" },
    select,
    el("button", { onclick: () => handlers.onNewDraft() }, "New chain"),
  );
  if (data.savedChainIds.includes(data.draft.id)) {
    bar.append(el("button", { class: "danger", onclick: () => handlers.onDeleteChain(data.draft.id) },
      `Delete ${data.draft.id}`));
  }
  return bar;
}

function renderMeta(draft: ChainDraft, handlers: BuilderHandlers): HTMLElement {
  const idInput = el("input", { value: draft.id, placeholder: "chain id" });
  idInput.addEventListener("change", () => handlers.onMeta({ id: idInput.value }));
  const nameInput = el("input", { value: draft.name, placeholder: "name" });
  nameInput.addEventListener("change", () => handlers.onMeta({ name: nameInput.value }));

  const impact = el("select", { class: "impact-select" },
    ...[1, 2, 3, 4, 5].map((level) =>
      el("option", { value: String(level), ...(level === draft.impactLevel ? { selected: true } : {}) },
        `I=${level}`)));
  impact.addEventListener("change", () => handlers.onMeta({ impactLevel: Number(impact.value) }));

  const row = el("div", { class: "meta-row" },
    idInput, nameInput, el("label", {}, "Impact ", impact),
    draft.dirty ? el("span", { class: "dirty-flag", title: "unsaved edits" }, "● unsaved") : null,
  );
  return row;
}

function renderLane(phase: Phase, draft: ChainDraft, catalog: CatalogDoc,
                    handlers: BuilderHandlers): HTMLElement {
  const lane = el("div", { class: "lane", "data-phase": phase },
    el("h4", {}, phase));
  lane.addEventListener("dragover", (event) => event.preventDefault());
  lane.addEventListener("drop", (event) => {
    event.preventDefault();
    const techniqueId = (event as DragEvent).dataTransfer?.getData("text/technique");
    if (techniqueId) handlers.onDrop(techniqueId, phase);
  });

  const names = new Map(catalog.techniques.map((t) => [t.id, t.name] as const));
  draft.lanes[phase].forEach((step, index) => {
    lane.append(renderStep(step, names.get(step.technique_id) ?? step.technique_id,
                           phase, index, handlers));
  });

  const adder = renderAdder(phase, catalog, handlers);
  if (adder) lane.append(adder);
  return lane;
}

/** Click-to-add fallback for keyboards and tests; drag and drop is the primary path. */
function renderAdder(phase: Phase, catalog: CatalogDoc,
                     handlers: BuilderHandlers): HTMLElement | null {
  if (!catalog.techniques.length) return null;
  const select = el("select", { class: "adder" },
    el("option", { value: "" }, "+ add technique"),
    ...catalog.techniques.map((t: Technique) => el("option", { value: t.id }, t.name)));
  select.addEventListener("change", () => {
    if (select.value) handlers.onDrop(select.value, phase);
    select.value = "";
  });
  return select;
}

function renderStep(step: DraftStep, label: string, phase: Phase, index: number,
                    handlers: BuilderHandlers): HTMLElement {
  const scoreSelect = (field: "threat" | "exposure") => {
    const select = el("select", { class: `score-${field}` },
      ...[1, 2, 3, 4, 5].map((v) =>
        el("option", { value: String(v), ...(v === step[field] ? { selected: true } : {}) },
          String(v))));
    select.addEventListener("change", () =>
      handlers.onUpdateStep(phase, index, { [field]: Number(select.value) }));
    return select;
  };

  const slider = el("input", {
    type: "range",
    min: String(MULTIPLIER_STEP),
    max: String(MULTIPLIER_MAX),
    step: String(MULTIPLIER_STEP),
    value: String(step.multiplier),
    class: "multiplier-slider",
  });
  const sliderLabel = el("span", { class: "multiplier-value" }, step.multiplier.toFixed(2));
  slider.addEventListener("input", () => {
    sliderLabel.textContent = Number(slider.value).toFixed(2);
  });
  slider.addEventListener("change", () =>
    handlers.onUpdateStep(phase, index, { multiplier: Number(slider.value) }));

  const node = el("div", { class: "step-card" },
    el("div", { class: "step-head" },
      el("strong", {}, label),
      el("button", { class: "remove", onclick: () => handlers.onRemoveStep(phase, index) }, "x")),
    el("div", { class: "step-controls" },
      el("label", {}, "T ", scoreSelect("threat")),
      el("label", {}, "E ", scoreSelect("exposure")),
      el("label", {}, "m ", slider, sliderLabel)),
  );
  for (const problem of step.problems) {
    node.append(el("div", { class: "step-problem" }, problem));
  }
  return node;
}

function renderSaveRow(draft: ChainDraft, handlers: BuilderHandlers): HTMLElement {
  const problems = draftProblems(draft);
  const button = el("button", {
    class: "save",
    onclick: () => handlers.onSave(),
    ...(problems.length ? { disabled: true } : {}),
  }, `Save chain (${stepCount(draft)} steps)`);
  const row = el("div", { class: "save-row" }, button);
  for (const problem of [...problems, ...draft.problems]) {
    row.append(el("div", { class: "draft-problem" }, problem));
  }
  return row;
}
