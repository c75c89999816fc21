/**
 * Pure formatting of service responses into the strings the panels show.
 * Kept DOM-free so the parity harness can assert on the exact display.
 */

import type { DsepResult, VasResult } from "./types.js";

export function dsepVerdictText(result: DsepResult): string {
  if (result.mode === "implied") {
    return result.separated
      ? "SEPARATED (implies conditional independence)"
      : "NOT SEPARATED (no implied conditional independence)";
  }
  return result.separated ? "SEPARATED" : "NOT SEPARATED";
}

export function vasSummaryText(result: VasResult): string {
  const head = `ATT(g=${result.g}, t=${result.t})`;
  if (!result.feasible) {
    const potential = result.minimal_potential.join(", ");
    return result.vas_family.kind === "none" && result.minimal_potential.length
      ? `${head}: infeasible — minimal set {${potential}} contains unobservable potential covariates`
      : `${head}: no valid adjustment set under these restrictions`;
  }
  const minimal = result.minimal_observable.join(", ");
  if (result.vas_family.kind === "interval") {
    const upper = result.vas_family.upper.join(", ");
    return `${head}: minimal {${minimal}}; any Z with {${minimal}} ⊆ Z ⊆ {${upper}} is valid`;
  }
  if (result.vas_family.kind === "list") {
    return `${head}: minimal {${minimal}}; ${result.vas_family.sets.length} valid sets`;
  }
  return `${head}: minimal {${minimal}}`;
}
