import type { Card, CaseDetail } from "./types.js";
import { ASPECTS, ASPECT_LABELS } from "./types.js";

export interface CardHandlers {
  onLike(caseId: number): void;
  onOpen(caseId: number): void;
}

export function formatScore(score: number | null): string {
  return score === null ? "" : score.toFixed(3);
}

function thumbnail(card: Card): HTMLElement {
  // The database stores vectors, not media bytes, so tiles get a stable
  // placeholder hue per case; the hover preview carries the matched text.
  const thumb = document.createElement("div");
  thumb.className = "thumb";
  thumb.setAttribute("loading", "lazy");
  thumb.style.background = `hsl(${(card.case_id * 47) % 360} 35% 72%)`;
  if (card.best_asset) {
    thumb.dataset.assetId = card.best_asset.asset_id;
    thumb.title = card.best_asset.source_path;
  }
  return thumb;
}

function cardTile(card: Card, handlers: CardHandlers): HTMLElement {
  const tile = document.createElement("article");
  tile.className = "card";
  tile.dataset.caseId = String(card.case_id);

  tile.appendChild(thumbnail(card));

  const title = document.createElement("h3");
  title.textContent = card.title;
  tile.appendChild(title);

  if (card.score !== null) {
    const score = document.createElement("span");
    score.className = "score";
    score.textContent = formatScore(card.score);
    tile.appendChild(score);
  }

  if (card.snippet) {
    const snippet = document.createElement("p");
    snippet.className = "snippet";
    snippet.textContent = card.snippet;
    tile.appendChild(snippet);
    const preview = document.createElement("div");
    preview.className = "hover-preview";
    preview.textContent = card.snippet;
    tile.appendChild(preview);
  }

  const tags = document.createElement("ul");
  tags.className = "tags";
  for (const tag of card.aspect_tags) {
    const li = document.createElement("li");
    li.textContent = tag;
    if (tag === card.best_aspect) li.className = "best";
    tags.appendChild(li);
  }
  tile.appendChild(tags);

  const likeButton = document.createElement("button");
  likeButton.className = "like";
  likeButton.type = "button";
  likeButton.textContent = "♥ like";
  likeButton.addEventListener("click", (event) => {
    event.stopPropagation();
    handlers.onLike(card.case_id);
  });
  tile.appendChild(likeButton);

  tile.addEventListener("click", () => handlers.onOpen(card.case_id));
  return tile;
}

/** Result grid: tiles in exactly the order the server returned them. */
export function renderResults(
  container: HTMLElement,
  cards: Card[],
  handlers: CardHandlers,
): void {
  container.replaceChildren();
  if (cards.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = "No matching design cases.";
    container.appendChild(empty);
    return;
  }
  for (const card of cards) container.appendChild(cardTile(card, handlers));
}

export function renderLikedRail(
  container: HTMLElement,
  liked: Card[],
  onUnlike: (caseId: number) => void,
): void {
  container.replaceChildren();
  if (liked.length === 0) {
    container.classList.add("empty");
    return;
  }
  container.classList.remove("empty");
  for (const card of liked) {
    const item = document.createElement("div");
    item.className = "liked-card";
    item.dataset.caseId = String(card.case_id);
    const title = document.createElement("span");
    title.textContent = card.title;
    item.appendChild(title);
    const unlikeButton = document.createElement("button");
    unlikeButton.type = "button";
    unlikeButton.className = "unlike";
    unlikeButton.textContent = "✕";
    unlikeButton.addEventListener("click", () => onUnlike(card.case_id));
    item.appendChild(unlikeButton);
    container.appendChild(item);
  }
}

/** Seven sliders in [0, 1]; emits the full weight map on every input. */
export function renderSliders(
  container: HTMLElement,
  weights: Record<string, number>,
  onChange: (weights: Record<string, number>) => void,
): void {
  container.replaceChildren();
  const current: Record<string, number> = {};
  for (const aspect of ASPECTS) current[aspect] = weights[aspect] ?? 1.0;

  for (const aspect of ASPECTS) {
    const row = document.createElement("label");
    row.className = "slider-row";
    const caption = document.createElement("span");
    caption.textContent = ASPECT_LABELS[aspect];
    row.appendChild(caption);

    const slider = document.createElement("input");
    slider.type = "range";
    slider.min = "0";
    slider.max = "1";
    slider.step = "0.05";
    slider.value = String(current[aspect]);
    slider.dataset.aspect = aspect;
    slider.addEventListener("input", () => {
      current[aspect] = Number(slider.value);
      onChange({ ...current });
    });
    row.appendChild(slider);
    container.appendChild(row);
  }
}

export function renderAnalyses(
  container: HTMLElement,
  analyses: Record<string, string[]> | null,
): void {
  container.replaceChildren();
  if (!analyses) return;
  for (const aspect of ASPECTS) {
    const sentences = analyses[aspect] ?? [];
    if (sentences.length === 0) continue;
    const block = document.createElement("section");
    block.className = "analysis";
    block.dataset.aspect = aspect;
    const heading = document.createElement("h4");
    heading.textContent = ASPECT_LABELS[aspect];
    block.appendChild(heading);
    const list = document.createElement("ul");
    for (const sentence of sentences) {
      const li = document.createElement("li");
      li.textContent = sentence;
      list.appendChild(li);
    }
    block.appendChild(list);
    container.appendChild(block);
  }
}

export function renderDetail(
  container: HTMLElement,
  detail: CaseDetail,
  onClose: () => void,
): void {
  container.replaceChildren();
  container.classList.add("open");

  const closeButton = document.createElement("button");
  closeButton.type = "button";
  closeButton.className = "close";
  closeButton.textContent = "← back to results";
  closeButton.addEventListener("click", onClose);
  container.appendChild(closeButton);

  const heading = document.createElement("h2");
  heading.textContent = detail.title;
  container.appendChild(heading);

  const description = document.createElement("p");
  description.className = "description";
  description.textContent = detail.description;
  container.appendChild(description);

  for (const [aspect, entries] of Object.entries(detail.entries_by_aspect)) {
    const block = document.createElement("section");
    block.dataset.aspect = aspect;
    const sub = document.createElement("h4");
    sub.textContent = aspect;
    block.appendChild(sub);
    const list = document.createElement("ul");
    for (const entry of entries) {
      const li = document.createElement("li");
      li.textContent = entry.text;
      li.dataset.entryId = entry.entry_id;
      list.appendChild(li);
    }
    block.appendChild(list);
    container.appendChild(block);
  }
}

export function renderError(container: HTMLElement, message: string | null): void {
  container.textContent = message ?? "";
  container.classList.toggle("visible", message !== null);
}
