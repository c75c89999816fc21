/** Wire types mirroring the engine's JSON schemas. */

export type NodeKind = "endogenous" | "exogenous" | "fixed";
export type NodeRole = "outcome" | "covariate" | "treatment" | "confounder" | "other";
export type LabelKind = "plain" | "alpha" | "alpha0";

export interface NodeJson {
  id: string;
  kind: NodeKind;
  role: NodeRole;
  t?: number;
  observed: boolean;
}

export interface EdgeJson {
  from: string;
  to: string;
  label: LabelKind;
  tag?: string;
}

export interface GraphJson {
  name?: string;
  nodes: NodeJson[];
  edges: EdgeJson[];
}

export interface SwigJson {
  graph: GraphJson;
  intervention: { treatment: string; value: 0 | 1 }[];
  split: Record<string, string>;
  relabel: Record<string, string>;
  redundant: Record<string, number[]>;
  materialized: string[];
}

export interface DeltaJson extends SwigJson {
  deltas: { name: string; minuend: string; subtrahend: string; parents: string[]; cancelled: string[] }[];
  pruned: string[];
  suppressed: string[];
}

export interface PathInfo {
  nodes: string[];
  open: boolean;
  blocked_by?: string;
  reason?: string;
}

export interface DsepResult {
  separated: boolean;
  implies_ci?: boolean;
  mode: "implied" | "dsep";
  explain?: { separated: boolean; witness?: string[]; paths?: PathInfo[] };
}

export interface VasResult {
  g: number;
  t: number;
  control: "nt" | "nyt";
  s?: number;
  minimal_potential: string[];
  minimal_observable: string[];
  feasible: boolean;
  vas_family:
    | { kind: "interval"; lower: string[]; upper: string[] }
    | { kind: "list"; sets: string[][] }
    | { kind: "none" };
  method: "formula" | "search";
}

export interface ApiError {
  code: string;
  message: string;
  location?: { line: number; col: number | null };
}
