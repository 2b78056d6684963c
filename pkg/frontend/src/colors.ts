import type { Band } from "./types";

/** Heatmap cell colors keyed by the band the service reports for that cell. */
export function bandColor(band: Band): string {
  switch (band) {
    case "Low":
      return "#2f9e44";
    case "Medium":
      return "#f08c00";
    case "High":
      return "#e03131";
    default:
      return "#868e96";
  }
}

export function bandClass(band: Band): string {
  return `band-${band.toLowerCase()}`;
}
