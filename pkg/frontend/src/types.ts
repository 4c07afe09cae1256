/** Wire types for /api/v1, mirroring the goldens in fixtures/api. */

export interface BestAsset {
  asset_id: string;
  source_path: string;
}

export interface Card {
  case_id: number;
  title: string;
  score: number | null;
  snippet: string | null;
  best_aspect: string | null;
  best_asset: BestAsset | null;
  aspect_tags: string[];
}

export interface ApiResult {
  session_id: string;
  cards: Card[];
  liked: Card[];
  weights: Record<string, number> | null;
  analyses?: Record<string, string[]>;
}

export interface CaseEntry {
  entry_id: string;
  text: string;
  origin: string;
}

export interface CaseDetail {
  case_id: number;
  title: string;
  description: string;
  assets: { asset_id: string; kind: string; source_path: string; category_hint: string | null }[];
  entries_by_aspect: Record<string, CaseEntry[]>;
  entry_count: number;
}

/** The seven critique aspects, in prompt order, as the API spells them. */
export const ASPECTS = [
  "form",
  "style",
  "material_usage",
  "sense_of_feeling",
  "context_relations",
  "passive_design",
  "general_highlights",
] as const;

export type Aspect = (typeof ASPECTS)[number];

export const ASPECT_LABELS: Record<Aspect, string> = {
  form: "Form",
  style: "Style",
  material_usage: "Material usage",
  sense_of_feeling: "Sense of feeling",
  context_relations: "Context relations",
  passive_design: "Passive design",
  general_highlights: "General highlights",
};

export type Mode = "text" | "image" | "browse";

export interface UiSessionState {
  session_id: string;
  mode: Mode;
  weights: Record<string, number>;
  liked: number[];
  cards: Card[];
  analyses: Record<string, string[]> | null;
}
