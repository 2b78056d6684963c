// Pure state helpers behind the chain builder and what-if panel. Everything
// here is plain data manipulation: the service remains the only place risk
// numbers come from.

import type {
  AssessmentDoc,
  ChainDoc,
  Finding,
  OverridesDoc,
  Phase,
  ScenarioDoc,
  StepDoc,
  StepOverrideDoc,
  Technique,
} from "./types";
import { MULTIPLIER_MAX, PHASES, SCORE_MAX, SCORE_MIN } from "./types";

export interface DraftStep {
  technique_id: string;
  threat: number;
  exposure: number;
  multiplier: number;
  note: string;
  /** validation messages attached from the last failed save, if any */
  problems: string[];
}

export interface ChainDraft {
  id: string;
  name: string;
  description: string;
  impactLevel: number;
  impactRationale: string;
  lanes: Record<Phase, DraftStep[]>;
  /** true when the draft differs from what the server holds */
  dirty: boolean;
  problems: string[];
}

export function emptyDraft(id = ""): ChainDraft {
  return {
    id,
    name: "",
    description: "",
    impactLevel: 3,
    impactRationale: "",
    lanes: { knowing: [], entering: [], finding: [], exploiting: [] },
    dirty: false,
    problems: [],
  };
}

export function draftFromChain(chain: ChainDoc): ChainDraft {
  const draft = emptyDraft(chain.id);
  draft.name = chain.name;
  draft.description = chain.description ?? "";
  draft.impactLevel = chain.impact.level;
  draft.impactRationale = chain.impact.rationale ?? "";
  for (const step of chain.steps) {
    draft.lanes[step.phase].push({
      technique_id: step.technique_id,
      threat: step.threat,
      exposure: step.exposure,
      multiplier: step.multiplier,
      note: step.note ?? "",
      problems: [],
    });
  }
  return draft;
}

/**
 * Lane placement fixes each step's phase, and lanes are concatenated in
 * canonical order, so a draft can never produce a phase-order violation.
 */
export function chainFromDraft(draft: ChainDraft): ChainDoc {
  const steps: StepDoc[] = [];
  for (const phase of PHASES) {
    for (const step of draft.lanes[phase]) {
      const doc: StepDoc = {
        technique_id: step.technique_id,
        phase,
        threat: step.threat,
        exposure: step.exposure,
        multiplier: step.multiplier,
      };
      if (step.note) doc.note = step.note;
      steps.push(doc);
    }
  }
  return {
    id: draft.id,
    name: draft.name,
    description: draft.description,
    impact: { level: draft.impactLevel, rationale: draft.impactRationale },
    steps,
  };
}

/** Drop a technique into a lane; T/E editors are prefilled from catalog defaults. */
export function addTechnique(draft: ChainDraft, technique: Technique, phase: Phase): ChainDraft {
  const next = cloneDraft(draft);
  next.lanes[phase].push({
    technique_id: technique.id,
    threat: technique.default_threat,
    exposure: technique.default_exposure,
    multiplier: 1.0,
    note: "",
    problems: [],
  });
  next.dirty = true;
  return next;
}

export function removeStep(draft: ChainDraft, phase: Phase, index: number): ChainDraft {
  const next = cloneDraft(draft);
  next.lanes[phase].splice(index, 1);
  next.dirty = true;
  return next;
}

export function updateStep(
  draft: ChainDraft, phase: Phase, index: number,
  patch: Partial<Pick<DraftStep, "threat" | "exposure" | "multiplier" | "note">>,
): ChainDraft {
  const next = cloneDraft(draft);
  next.lanes[phase][index] = { ...next.lanes[phase][index], ...patch, problems: [] };
  next.dirty = true;
  return next;
}

export function moveStep(draft: ChainDraft, from: Phase, index: number, to: Phase): ChainDraft {
  const next = cloneDraft(draft);
  const [step] = next.lanes[from].splice(index, 1);
  if (step) next.lanes[to].push(step);
  next.dirty = true;
  return next;
}

function cloneDraft(draft: ChainDraft): ChainDraft {
  return {
    ...draft,
    lanes: Object.fromEntries(
      PHASES.map((p) => [p, draft.lanes[p].map((s) => ({ ...s, problems: [...s.problems] }))]),
    ) as Record<Phase, DraftStep[]>,
    problems: [...draft.problems],
  };
}

/** Quick client-side checks so the save button can disable before a round-trip. */
export function draftProblems(draft: ChainDraft): string[] {
  const problems: string[] = [];
  if (!draft.id.trim()) problems.push("chain id is required");
  if (stepCount(draft) === 0) problems.push("chain needs at least one step");
  for (const phase of PHASES) {
    draft.lanes[phase].forEach((step, i) => {
      if (step.threat < SCORE_MIN || step.threat > SCORE_MAX
          || step.exposure < SCORE_MIN || step.exposure > SCORE_MAX) {
        problems.push(`${phase}[${i}]: scores must be in ${SCORE_MIN}..${SCORE_MAX}`);
      }
      if (!(step.multiplier > 0 && step.multiplier <= MULTIPLIER_MAX)) {
        problems.push(`${phase}[${i}]: multiplier must be in (0, ${MULTIPLIER_MAX}]`);
      }
    });
  }
  return problems;
}

export function stepCount(draft: ChainDraft): number {
  return PHASES.reduce((n, p) => n + draft.lanes[p].length, 0);
}

/** Locate a flat step index (as used in service findings) inside the lanes. */
export function laneposOf(draft: ChainDraft, flatIndex: number): { phase: Phase; index: number } | null {
  let remaining = flatIndex;
  for (const phase of PHASES) {
    if (remaining < draft.lanes[phase].length) return { phase, index: remaining };
    remaining -= draft.lanes[phase].length;
  }
  return null;
}

/** Attach service-side findings (paths like `$.steps[3].threat`) to draft steps. */
export function attachFindings(draft: ChainDraft, findings: Finding[]): ChainDraft {
  const next = cloneDraft(draft);
  next.problems = [];
  for (const finding of findings) {
    const match = finding.path.match(/steps\[(\d+)\]/);
    const pos = match ? laneposOf(next, Number(match[1])) : null;
    if (pos) {
      next.lanes[pos.phase][pos.index].problems.push(finding.message);
    } else {
      next.problems.push(`${finding.path}: ${finding.message}`);
    }
  }
  return next;
}

// ---------------------------------------------------------------------------
// what-if panel state

export interface WhatIfState {
  method?: "max" | "avg" | "geom";
  globalMultiplier?: number;
  steps: Map<string, { threat?: number; exposure?: number; multiplier?: number }>;
  impacts: Map<string, number>;
}

export function emptyWhatIf(): WhatIfState {
  return { steps: new Map(), impacts: new Map() };
}

export function whatIfIsEmpty(state: WhatIfState): boolean {
  return state.method === undefined && state.globalMultiplier === undefined
    && state.steps.size === 0 && state.impacts.size === 0;
}

export function stepKey(chainId: string, stepIndex: number): string {
  return JSON.stringify([chainId, stepIndex]);
}

function parseStepKey(key: string): [string, number] {
  return JSON.parse(key) as [string, number];
}

export function setStepOverride(
  state: WhatIfState, chainId: string, stepIndex: number,
  patch: { threat?: number; exposure?: number; multiplier?: number },
): WhatIfState {
  const steps = new Map(state.steps);
  const key = stepKey(chainId, stepIndex);
  const merged = { ...(steps.get(key) ?? {}), ...patch };
  steps.set(key, merged);
  return { ...state, steps };
}

export function overridesPayload(state: WhatIfState): OverridesDoc {
  const doc: OverridesDoc = {};
  if (state.method !== undefined) doc.method = state.method;
  if (state.globalMultiplier !== undefined) doc.global_multiplier = state.globalMultiplier;
  if (state.steps.size) {
    const steps: StepOverrideDoc[] = [];
    for (const [key, patch] of state.steps) {
      const [chainId, index] = parseStepKey(key);
      steps.push({ chain_id: chainId, step_index: index, ...patch });
    }
    doc.steps = steps;
  }
  if (state.impacts.size) {
    doc.impacts = [...state.impacts].map(([chain_id, impact]) => ({ chain_id, impact }));
  }
  return doc;
}

/**
 * Build the PUT bodies that commit pending overrides to the portfolio.
 * This is plain document editing (the same edit the server applies
 * speculatively during what-if); no scoring happens client-side.
 */
export function applyOverridesToChains(chains: ChainDoc[], state: WhatIfState): ChainDoc[] {
  const edited = new Map<string, ChainDoc>();
  const byId = new Map(chains.map((c) => [c.id, c] as const));

  const editable = (id: string): ChainDoc | undefined => {
    if (!edited.has(id)) {
      const original = byId.get(id);
      if (!original) return undefined;
      edited.set(id, {
        ...original,
        impact: { ...original.impact },
        steps: original.steps.map((s) => ({ ...s })),
      });
    }
    return edited.get(id);
  };

  for (const [key, patch] of state.steps) {
    const [chainId, index] = parseStepKey(key);
    const chain = editable(chainId);
    const step = chain?.steps[index];
    if (!step) continue;
    if (patch.threat !== undefined) step.threat = patch.threat;
    if (patch.exposure !== undefined) step.exposure = patch.exposure;
    if (patch.multiplier !== undefined) step.multiplier = patch.multiplier;
  }
  for (const [chainId, level] of state.impacts) {
    const chain = editable(chainId);
    if (chain) chain.impact.level = level;
  }
  return [...edited.values()];
}

// ---------------------------------------------------------------------------
// dashboard helpers

/** Group scenarios by their (likelihood, impact) matrix cell for the heatmap pins. */
export function pinByCell(assessment: AssessmentDoc): Map<string, ScenarioDoc[]> {
  const pins = new Map<string, ScenarioDoc[]>();
  for (const scenario of assessment.scenarios) {
    const key = cellKey(scenario.discrete_likelihood, scenario.impact);
    const bucket = pins.get(key) ?? [];
    bucket.push(scenario);
    pins.set(key, bucket);
  }
  return pins;
}

export function cellKey(likelihood: number, impact: number): string {
  return `${likelihood},${impact}`;
}
