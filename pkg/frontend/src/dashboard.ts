// Risk dashboard: the 5x5 matrix as a heatmap with scenarios pinned to their
// (L, I) cell, plus a side table listing the raw likelihood under all three
// aggregation methods. All values are taken verbatim from service responses.

import { bandClass, bandColor } from "./colors";
import { el } from "./dom";
import { cellKey, pinByCell } from "./state";
import type { AssessmentDoc, MatrixDoc, Method } from "./types";
import { METHODS } from "./types";

export interface DashboardData {
  matrix: MatrixDoc;
  /** one assessment per method, as returned by POST /api/assess */
  assessments: Partial<Record<Method, AssessmentDoc>>;
  activeMethod: Method;
}

export function renderDashboard(data: DashboardData): HTMLElement {
  const active = data.assessments[data.activeMethod];
  if (!active) {
    return el("div", { class: "empty-state" },
      "No assessment yet. Run one from the toolbar to populate the dashboard.");
  }
  return el("div", { class: "dashboard" },
    renderHeatmap(data.matrix, active),
    renderSideTable(data),
  );
}

function renderHeatmap(matrix: MatrixDoc, assessment: AssessmentDoc): HTMLElement {
  const pins = pinByCell(assessment);
  const table = el("table", { class: "heatmap" });

  const header = el("tr", {}, el("th", {}, ""));
  matrix.impact_labels.forEach((label, i) =>
    header.append(el("th", {}, `I=${i + 1}`, el("span", { class: "axis-label" }, label))));
  table.append(header);

  // rows printed top-down from L=5 so likelihood grows upward
  for (let likelihood = 5; likelihood >= 1; likelihood -= 1) {
    const row = el("tr", {},
      el("th", {}, `L=${likelihood}`,
        el("span", { class: "axis-label" }, matrix.likelihood_labels[likelihood - 1])));
    for (let impact = 1; impact <= 5; impact += 1) {
      const cell = matrix.cells[likelihood - 1][impact - 1];
      const scenarios = pins.get(cellKey(likelihood, impact)) ?? [];
      const cellNode = el("td", {
        class: `cell ${bandClass(cell.band)}`,
        style: `background:${bandColor(cell.band)}`,
        "data-band": cell.band,
        "data-likelihood": String(likelihood),
        "data-impact": String(impact),
      }, el("span", { class: "cell-value" }, String(cell.value)));
      for (const scenario of scenarios) {
        const flagged = assessment.treatment_required.includes(scenario.chain_id);
        cellNode.append(el("span", {
          class: `pin${flagged ? " pin-flagged" : ""}`,
          title: `${scenario.chain_id}: R=${scenario.risk_value} (${scenario.risk_band})`,
          "data-chain": scenario.chain_id,
        }, scenario.chain_id));
      }
      row.append(cellNode);
    }
    table.append(row);
  }
  return el("div", { class: "heatmap-wrap" },
    el("h3", {}, `Risk matrix (method: ${methodLabel(assessment)})`), table);
}

function methodLabel(assessment: AssessmentDoc): string {
  return assessment.config.method;
}

function renderSideTable(data: DashboardData): HTMLElement {
  const chains = new Set<string>();
  for (const method of METHODS) {
    for (const scenario of data.assessments[method]?.scenarios ?? []) {
      chains.add(scenario.chain_id);
    }
  }
  const table = el("table", { class: "side-table" });
  const header = el("tr", {}, el("th", {}, "chain"));
  for (const method of METHODS) {
    header.append(el("th", {}, `${method} raw`), el("th", {}, "L"), el("th", {}, "R"));
  }
  table.append(header);

  const active = data.assessments[data.activeMethod];
  for (const chainId of [...chains].sort()) {
    const flagged = active?.treatment_required.includes(chainId) ?? false;
    const row = el("tr", { class: flagged ? "treatment-flagged" : "" },
      el("td", {}, chainId + (flagged ? " ⚠" : "")));
    for (const method of METHODS) {
      const scenario = data.assessments[method]?.scenarios
        .find((s) => s.chain_id === chainId);
      if (!scenario) {
        row.append(el("td", {}, "-"), el("td", {}, "-"), el("td", {}, "-"));
      } else {
        row.append(
          el("td", {}, scenario.raw_likelihood.toFixed(3)),
          el("td", {}, String(scenario.discrete_likelihood)),
          el("td", { class: bandClass(scenario.risk_band) },
            `${scenario.risk_value} (${scenario.risk_band})`),
        );
      }
    }
    table.append(row);
  }
  return el("div", { class: "side-table-wrap" },
    el("h3", {}, "All three aggregations"), table);
}
