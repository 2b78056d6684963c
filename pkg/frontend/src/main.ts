// Application shell: owns the state, wires the three views to the service,
// and re-fetches after every mutation (the service pushes nothing).

import { Api, ApiError } from "./api";
import { renderBuilder } from "./builder";
import { renderDashboard } from "./dashboard";
import { debounce } from "./debounce";
import { clear, el } from "./dom";
import {
  ChainDraft,
  WhatIfState,
  addTechnique,
  applyOverridesToChains,
  attachFindings,
  chainFromDraft,
  draftFromChain,
  emptyDraft,
  emptyWhatIf,
  overridesPayload,
  removeStep,
  setStepOverride,
  updateStep,
  whatIfIsEmpty,
} from "./state";
import type {
  AssessmentDoc,
  CatalogDoc,
  ChainDoc,
  ContextDoc,
  MatrixDoc,
  Method,
  Phase,
  WhatIfDiffDoc,
} from "./types";
import { METHODS } from "./types";
import { renderWhatIf } from "./whatif";

type Tab = "builder" | "dashboard" | "whatif";

interface AppState {
  tab: Tab;
  revision: number;
  catalog: CatalogDoc;
  chains: ChainDoc[];
  context: ContextDoc | null;
  matrix: MatrixDoc | null;
  method: Method;
  globalMultiplier: number;
  threshold: number | null;
  assessments: Partial<Record<Method, AssessmentDoc>>;
  draft: ChainDraft;
  whatIf: WhatIfState;
  diff: WhatIfDiffDoc | null;
  busy: boolean;
  error: string | null;
  notice: string | null;
}

const api = new Api("");

const state: AppState = {
  tab: "builder",
  revision: 0,
  catalog: { version: "", tactics: [], techniques: [] },
  chains: [],
  context: null,
  matrix: null,
  method: "geom",
  globalMultiplier: 1.0,
  threshold: null,
  assessments: {},
  draft: emptyDraft(),
  whatIf: emptyWhatIf(),
  diff: null,
  busy: false,
  error: null,
  notice: null,
};

async function refresh(): Promise<void> {
  const [catalog, chains] = await Promise.all([api.getCatalog(), api.listChains()]);
  state.catalog = catalog.catalog;
  state.chains = chains.chains;
  state.context = chains.context;
  state.revision = chains.revision;
  if (!state.matrix) state.matrix = await api.getMatrix();
}

function assessRequest() {
  return {
    method: state.method,
    global_multiplier: state.globalMultiplier,
    ...(state.threshold !== null ? { threshold: state.threshold } : {}),
  };
}

async function runAssessments(): Promise<void> {
  state.busy = true;
  render();
  try {
    const results = await Promise.all(METHODS.map((method) =>
      api.assess({ ...assessRequest(), method })));
    state.assessments = Object.fromEntries(
      METHODS.map((method, i) => [method, results[i].result]));
    state.error = null;
    state.tab = "dashboard";
  } catch (err) {
    state.assessments = {};
    state.error = describe(err);
  } finally {
    state.busy = false;
    render();
  }
}

const fireWhatIf = debounce(async () => {
  if (whatIfIsEmpty(state.whatIf)) {
    state.diff = null;
    render();
    return;
  }
  try {
    const response = await api.whatIf({ ...assessRequest() }, overridesPayload(state.whatIf));
    state.diff = response.diff;
    state.error = null;
  } catch (err) {
    state.error = describe(err);
  }
  render();
}, 250);

function describe(err: unknown): string {
  if (err instanceof ApiError) {
    const detail = err.findings.map((f) => `${f.path}: ${f.message}`).join("; ");
    return detail ? `${err.message} — ${detail}` : err.message;
  }
  return String(err);
}

// ---------------------------------------------------------------------------
// handlers

const builderHandlers = {
  onDrop(techniqueId: string, phase: Phase) {
    const technique = state.catalog.techniques.find((t) => t.id === techniqueId);
    if (technique) {
      state.draft = addTechnique(state.draft, technique, phase);
      render();
    }
  },
  onRemoveStep(phase: Phase, index: number) {
    state.draft = removeStep(state.draft, phase, index);
    render();
  },
  onUpdateStep(phase: Phase, index: number, patch: Parameters<typeof updateStep>[3]) {
    state.draft = updateStep(state.draft, phase, index, patch);
    render();
  },
  onMeta(patch: { id?: string; name?: string; description?: string;
                  impactLevel?: number; impactRationale?: string }) {
    state.draft = { ...state.draft, ...patch, dirty: true };
    render();
  },
  async onSave() {
    const doc = chainFromDraft(state.draft);
    const exists = state.chains.some((c) => c.id === doc.id);
    try {
      const response = exists
        ? await api.updateChain(doc, state.revision)
        : await api.createChain(doc, state.revision);
      state.notice = `saved ${doc.id} (revision ${response.revision})`;
      state.error = null;
      await refresh();
      state.draft = { ...state.draft, dirty: false, problems: [] };
    } catch (err) {
      if (err instanceof ApiError && err.findings.length) {
        state.draft = attachFindings(state.draft, err.findings);
      }
      state.error = describe(err);
    }
    render();
  },
  onLoadChain(chainId: string) {
    const chain = state.chains.find((c) => c.id === chainId);
    if (chain) {
      state.draft = draftFromChain(chain);
      render();
    }
  },
  onNewDraft() {
    state.draft = emptyDraft();
    render();
  },
  async onDeleteChain(chainId: string) {
    try {
      await api.deleteChain(chainId, state.revision);
      state.notice = `deleted ${chainId}`;
      state.error = null;
      await refresh();
      state.draft = emptyDraft();
    } catch (err) {
      state.error = describe(err);
    }
    render();
  },
};

const whatIfHandlers = {
  onMethod(method: Method | undefined) {
    state.whatIf = { ...state.whatIf, method };
    fireWhatIf();
  },
  onGlobalMultiplier(value: number | undefined) {
    state.whatIf = { ...state.whatIf, globalMultiplier: value };
    fireWhatIf();
  },
  onStepOverride(chainId: string, stepIndex: number,
                 patch: { threat?: number; exposure?: number; multiplier?: number }) {
    state.whatIf = setStepOverride(state.whatIf, chainId, stepIndex, patch);
    fireWhatIf();
  },
  onImpactOverride(chainId: string, level: number) {
    const impacts = new Map(state.whatIf.impacts);
    impacts.set(chainId, level);
    state.whatIf = { ...state.whatIf, impacts };
    fireWhatIf();
  },
  onReset() {
    state.whatIf = emptyWhatIf();
    state.diff = null;
    render();
  },
  async onApply() {
    state.busy = true;
    render();
    try {
      for (const chain of applyOverridesToChains(state.chains, state.whatIf)) {
        const response = await api.updateChain(chain, state.revision);
        state.revision = response.revision;
      }
      state.notice = "overrides applied to portfolio";
      state.whatIf = emptyWhatIf();
      state.diff = null;
      state.error = null;
      await refresh();
      await runAssessments();
    } catch (err) {
      state.error = describe(err);
    } finally {
      state.busy = false;
      render();
    }
  },
};

// ---------------------------------------------------------------------------
// shell rendering

function renderToolbar(): HTMLElement {
  const method = el("select", {},
    ...METHODS.map((m) =>
      el("option", { value: m, ...(m === state.method ? { selected: true } : {}) }, m)));
  method.addEventListener("change", () => {
    state.method = method.value as Method;
    render();
  });

  const multiplier = el("input", {
    type: "range", min: "0.05", max: "2", step: "0.05",
    value: String(state.globalMultiplier),
  });
  const multiplierLabel = el("span", {}, `M=${state.globalMultiplier.toFixed(2)}`);
  multiplier.addEventListener("input", () => {
    multiplierLabel.textContent = `M=${Number(multiplier.value).toFixed(2)}`;
  });
  multiplier.addEventListener("change", () => {
    state.globalMultiplier = Number(multiplier.value);
  });

  const run = el("button", {
    class: "run",
    onclick: () => { void runAssessments(); },
    ...(state.busy ? { disabled: true } : {}),
  }, state.busy ? "Assessing…" : "Run assessment");

  return el("div", { class: "toolbar" },
    el("label", {}, "Method ", method),
    el("label", {}, multiplier, multiplierLabel),
    el("span", { class: "muted" },
      ` threshold R ≥ ${state.threshold ?? state.context?.acceptance_threshold ?? "-"}`),
    run,
    el("span", { class: "muted revision" }, `revision ${state.revision}`),
  );
}

function renderTabs(): HTMLElement {
  const tabs: [Tab, string][] = [
    ["builder", "Chain builder"], ["dashboard", "Risk dashboard"], ["whatif", "What-if"],
  ];
  return el("nav", { class: "tabs" },
    ...tabs.map(([tab, label]) => {
      const button = el("button", {
        class: state.tab === tab ? "tab active" : "tab",
        onclick: () => { state.tab = tab; render(); },
      }, label);
      return button;
    }));
}

function render(): void {
  const root = document.querySelector<HTMLDivElement>("#app");
  if (!root) return;
  clear(root);
  root.append(
    el("header", {},
      el("h1", {}, "quantrisk"),
      el("p", { class: "muted" },
        "Kill-chain risk assessment for quantum communication systems"),
      renderTabs(),
      renderToolbar()),
  );
  if (state.error) root.append(el("div", { class: "error-bar" }, state.error));
  if (state.notice) root.append(el("div", { class: "notice-bar" }, state.notice));

  if (state.tab === "builder") {
    root.append(renderBuilder({
      catalog: state.catalog,
      draft: state.draft,
      savedChainIds: state.chains.map((c) => c.id),
    }, builderHandlers));
  } else if (state.tab === "dashboard") {
    root.append(renderDashboard({
      matrix: state.matrix ?? { likelihood_labels: [], impact_labels: [], cells: [] },
      assessments: state.assessments,
      activeMethod: state.method,
    }));
  } else {
    root.append(renderWhatIf({
      chains: state.chains,
      state: state.whatIf,
      diff: state.diff,
      busy: state.busy,
    }, whatIfHandlers));
  }
}

async function boot(): Promise<void> {
  try {
    await refresh();
  } catch (err) {
    state.error = `service unreachable: ${describe(err)}`;
  }
  render();
}

void boot();
