import type { ApiResult, Mode, UiSessionState } from "./types.js";
import { ASPECTS } from "./types.js";

const STORAGE_KEY = "archseek.session";

export function uniformWeights(): Record<string, number> {
  const weights: Record<string, number> = {};
  for (const aspect of ASPECTS) weights[aspect] = 1.0;
  return weights;
}

/** Fold a server result into the client state; the server is the truth. */
export function applyResult(
  state: UiSessionState | null,
  result: ApiResult,
  mode: Mode,
): UiSessionState {
  return {
    session_id: result.session_id,
    mode,
    weights: result.weights ?? state?.weights ?? uniformWeights(),
    liked: result.liked.map((c) => c.case_id),
    cards: result.cards,
    analyses: result.analyses ?? (mode === "image" ? (state?.analyses ?? null) : null),
  };
}

export function saveSession(state: UiSessionState, storage: Storage = sessionStorage): void {
  storage.setItem(
    STORAGE_KEY,
    JSON.stringify({ session_id: state.session_id, mode: state.mode }),
  );
}

export function loadSavedSession(
  storage: Storage = sessionStorage,
): { session_id: string; mode: Mode } | null {
  const raw = storage.getItem(STORAGE_KEY);
  if (!raw) return null;
  try {
    const parsed = JSON.parse(raw) as { session_id?: unknown; mode?: unknown };
    if (typeof parsed.session_id !== "string" || !parsed.session_id) return null;
    const mode: Mode =
      parsed.mode === "image" || parsed.mode === "browse" ? parsed.mode : "text";
    return { session_id: parsed.session_id, mode };
  } catch {
    return null;
  }
}

export function clearSavedSession(storage: Storage = sessionStorage): void {
  storage.removeItem(STORAGE_KEY);
}
