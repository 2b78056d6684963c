// Wire types mirroring the quantrisk service JSON contracts.

export type Band = "Low" | "Medium" | "High";
export type Method = "max" | "avg" | "geom";
export type Phase = "knowing" | "entering" | "finding" | "exploiting";

export const PHASES: Phase[] = ["knowing", "entering", "finding", "exploiting"];
export const METHODS: Method[] = ["max", "avg", "geom"];

export interface TacticDef {
  id: string;
  name: string;
  description: string;
}

export interface Technique {
  id: string;
  name: string;
  description: string;
  tactics: string[];
  objective: string;
  mechanism: string;
  environment: string;
  capability: number;
  lifecycle: string;
  layer: string;
  default_threat: number;
  default_exposure: number;
  indicators: string[];
  countermeasures: string[];
}

export interface CatalogDoc {
  version: string;
  tactics: TacticDef[];
  techniques: Technique[];
}

export interface StepDoc {
  technique_id: string;
  phase: Phase;
  threat: number;
  exposure: number;
  multiplier: number;
  note?: string;
}

export interface ImpactDoc {
  level: number;
  rationale: string;
}

export interface ChainDoc {
  id: string;
  name: string;
  description: string;
  impact: ImpactDoc;
  steps: StepDoc[];
}

export interface ContextDoc {
  scope: string;
  acceptance_threshold: number;
  roles: { role: string; responsibility: string }[];
}

export interface BoundsDoc {
  lower: number;
  upper: number;
}

export interface ScenarioDoc {
  chain_id: string;
  step_likelihoods: number[];
  raw_likelihood: number;
  adjusted_likelihood: number;
  discrete_likelihood: number;
  impact: number;
  risk_value: number;
  risk_band: Band;
  weakest_step_index: number;
  success_probability?: number;
}

export interface ConfigDoc {
  method: Method;
  global_multiplier: number;
  boundary_epsilon: number;
  n_max: number;
  acceptance_threshold: number | null;
  matrix: MatrixCell[][];
}

export interface AssessmentDoc {
  config: ConfigDoc;
  bounds: BoundsDoc;
  scenarios: ScenarioDoc[];
  treatment_required: string[];
}

export interface DeltaDoc {
  chain_id: string;
  baseline_likelihood: number;
  modified_likelihood: number;
  delta_likelihood: number;
  baseline_risk: number;
  modified_risk: number;
  delta_risk: number;
  baseline_band: Band;
  modified_band: Band;
  band_changed: boolean;
}

export interface WhatIfDiffDoc {
  baseline: AssessmentDoc;
  modified: AssessmentDoc;
  deltas: DeltaDoc[];
  bounds_changed: boolean;
}

export interface MatrixCell {
  value: number;
  band: Band;
}

export interface MatrixDoc {
  likelihood_labels: string[];
  impact_labels: string[];
  cells: MatrixCell[][];
}

export interface Finding {
  severity: "error" | "warning";
  path: string;
  message: string;
}

export interface StepOverrideDoc {
  chain_id: string;
  step_index: number;
  threat?: number;
  exposure?: number;
  multiplier?: number;
}

export interface OverridesDoc {
  method?: Method;
  global_multiplier?: number;
  steps?: StepOverrideDoc[];
  impacts?: { chain_id: string; impact: number }[];
}

export interface AssessRequest {
  method?: Method;
  global_multiplier?: number;
  threshold?: number;
}

// Domain bounds shared by every slider/selector; mirrors the server contract.
export const SCORE_MIN = 1;
export const SCORE_MAX = 5;
export const MULTIPLIER_MAX = 2.0;
export const MULTIPLIER_STEP = 0.05;
