// What-if explorer: sliders and selectors build a pending override set;
// every change debounces into POST /api/whatif and the diff renders next to
// the controls. Nothing is written to the portfolio until "apply".

import { bandClass } from "./colors";
import { el } from "./dom";
import type { WhatIfState } from "./state";
import { stepKey, whatIfIsEmpty } from "./state";
import type { ChainDoc, Method, WhatIfDiffDoc } from "./types";
import { METHODS, MULTIPLIER_MAX, MULTIPLIER_STEP } from "./types";

export interface WhatIfHandlers {
  onMethod(method: Method | undefined): void;
  onGlobalMultiplier(value: number | undefined): void;
  onStepOverride(chainId: string, stepIndex: number,
                 patch: { threat?: number; exposure?: number; multiplier?: number }): void;
  onImpactOverride(chainId: string, level: number): void;
  onReset(): void;
  onApply(): void;
}

export interface WhatIfData {
  chains: ChainDoc[];
  state: WhatIfState;
  diff: WhatIfDiffDoc | null;
  busy: boolean;
}

export function renderWhatIf(data: WhatIfData, handlers: WhatIfHandlers): HTMLElement {
  if (!data.chains.length) {
    return el("div", { class: "empty-state" }, "No chains to explore — build one first.");
  }
  return el("div", { class: "whatif" },
    el("div", { class: "whatif-controls" },
      renderGlobalControls(data, handlers),
      ...data.chains.map((chain) => renderChainControls(chain, data, handlers)),
      renderActions(data, handlers)),
    renderDiff(data),
  );
}

function renderGlobalControls(data: WhatIfData, handlers: WhatIfHandlers): HTMLElement {
  const method = el("select", { class: "whatif-method" },
    el("option", { value: "" }, "method: keep"),
    ...METHODS.map((m) =>
      el("option", { value: m, ...(data.state.method === m ? { selected: true } : {}) }, m)));
  method.addEventListener("change", () =>
    handlers.onMethod((method.value || undefined) as Method | undefined));

  const slider = el("input", {
    type: "range", class: "global-multiplier",
    min: String(MULTIPLIER_STEP), max: String(MULTIPLIER_MAX), step: String(MULTIPLIER_STEP),
    value: String(data.state.globalMultiplier ?? 1.0),
  });
  const label = el("span", {}, `M=${(data.state.globalMultiplier ?? 1.0).toFixed(2)}`);
  slider.addEventListener("input", () => {
    label.textContent = `M=${Number(slider.value).toFixed(2)}`;
  });
  slider.addEventListener("change", () => handlers.onGlobalMultiplier(Number(slider.value)));

  return el("div", { class: "whatif-global" },
    el("h4", {}, "Global"), el("label", {}, "Method ", method),
    el("label", {}, "Global multiplier ", slider, label));
}

function renderChainControls(chain: ChainDoc, data: WhatIfData,
                             handlers: WhatIfHandlers): HTMLElement {
  const box = el("div", { class: "whatif-chain" }, el("h4", {}, chain.id));

  const impact = el("select", { class: "impact-override" },
    ...[1, 2, 3, 4, 5].map((level) => {
      const current = data.state.impacts.get(chain.id) ?? chain.impact.level;
      return el("option", { value: String(level), ...(level === current ? { selected: true } : {}) },
        `I=${level}`);
    }));
  impact.addEventListener("change", () =>
    handlers.onImpactOverride(chain.id, Number(impact.value)));
  box.append(el("label", {}, "Impact ", impact));

  chain.steps.forEach((step, index) => {
    const pending = data.state.steps.get(stepKey(chain.id, index)) ?? {};
    const effective = pending.multiplier ?? step.multiplier;
    const slider = el("input", {
      type: "range", class: "step-multiplier",
      "data-chain": chain.id, "data-step": String(index),
      min: String(MULTIPLIER_STEP), max: String(MULTIPLIER_MAX), step: String(MULTIPLIER_STEP),
      value: String(effective),
    });
    const label = el("span", { class: "muted" }, `m=${effective.toFixed(2)}`);
    slider.addEventListener("input", () => {
      label.textContent = `m=${Number(slider.value).toFixed(2)}`;
    });
    slider.addEventListener("change", () =>
      handlers.onStepOverride(chain.id, index, { multiplier: Number(slider.value) }));

    const scoreSelect = (field: "threat" | "exposure") => {
      const current = pending[field] ?? step[field];
      const select = el("select", {},
        ...[1, 2, 3, 4, 5].map((v) =>
          el("option", { value: String(v), ...(v === current ? { selected: true } : {}) }, String(v))));
      select.addEventListener("change", () =>
        handlers.onStepOverride(chain.id, index, { [field]: Number(select.value) }));
      return select;
    };

    box.append(el("div", { class: "whatif-step" },
      el("span", { class: "step-name" }, `${index}: ${step.technique_id}`),
      el("label", {}, "T ", scoreSelect("threat")),
      el("label", {}, "E ", scoreSelect("exposure")),
      el("label", {}, slider, label)));
  });
  return box;
}

function renderActions(data: WhatIfData, handlers: WhatIfHandlers): HTMLElement {
  const empty = whatIfIsEmpty(data.state);
  return el("div", { class: "whatif-actions" },
    el("button", { onclick: () => handlers.onReset(), ...(empty ? { disabled: true } : {}) },
      "Reset overrides"),
    el("button", {
      class: "apply", onclick: () => handlers.onApply(),
      ...(empty || data.busy ? { disabled: true } : {}),
    }, "Apply to portfolio"),
  );
}

function renderDiff(data: WhatIfData): HTMLElement {
  if (!data.diff) {
    return el("div", { class: "whatif-diff empty-state" },
      "Adjust a control to preview recomputed ratings.");
  }
  const diff = data.diff;
  const wrap = el("div", { class: "whatif-diff" }, el("h4", {}, "Baseline → modified"));
  if (diff.bounds_changed) {
    wrap.append(el("div", { class: "bounds-badge", "data-bounds-changed": "true" },
      `bounds changed: [${diff.baseline.bounds.lower}, ${diff.baseline.bounds.upper}] → ` +
      `[${diff.modified.bounds.lower}, ${diff.modified.bounds.upper}] — every chain re-discretized`));
  }
  const table = el("table", { class: "diff-table" },
    el("tr", {}, el("th", {}, "chain"), el("th", {}, "L"), el("th", {}, "R"),
      el("th", {}, "band")));
  for (const delta of diff.deltas) {
    table.append(el("tr", { class: delta.band_changed ? "band-changed" : "" },
      el("td", {}, delta.chain_id),
      el("td", {}, `${delta.baseline_likelihood} → ${delta.modified_likelihood} (${signed(delta.delta_likelihood)})`),
      el("td", {}, `${delta.baseline_risk} → ${delta.modified_risk} (${signed(delta.delta_risk)})`),
      el("td", {},
        el("span", { class: bandClass(delta.baseline_band) }, delta.baseline_band),
        " → ",
        el("span", { class: bandClass(delta.modified_band) }, delta.modified_band)),
    ));
  }
  wrap.append(table);
  return wrap;
}

function signed(value: number): string {
  return value > 0 ? `+${value}` : String(value);
}
