import { beforeEach, describe, expect, it, vi } from "vitest";

import {
  formatScore,
  renderLikedRail,
  renderResults,
  renderSliders,
  renderAnalyses,
} from "../src/render.js";
import { ASPECTS } from "../src/types.js";
import { card } from "./helpers.js";

import queryTextGolden from "../../fixtures/api/query_text.json";
import queryImageGolden from "../../fixtures/api/query_image.json";

const noop = { onLike: () => {}, onOpen: () => {} };

let container: HTMLElement;

beforeEach(() => {
  document.body.innerHTML = "<div id='c'></div>";
  container = document.getElementById("c") as HTMLElement;
});

describe("renderResults", () => {
  it("renders tiles in exactly the given order", () => {
    const cards = [card(5), card(2), card(9), card(1), card(7)];
    renderResults(container, cards, noop);
    const ids = [...container.querySelectorAll<HTMLElement>(".card")].map((el) =>
      Number(el.dataset.caseId),
    );
    expect(ids).toEqual([5, 2, 9, 1, 7]);
  });

  it("renders the shipped text-query golden in payload order", () => {
    const payload = (queryTextGolden as any).response;
    renderResults(container, payload.cards, noop);
    const ids = [...container.querySelectorAll<HTMLElement>(".card")].map((el) =>
      Number(el.dataset.caseId),
    );
    expect(ids).toEqual(payload.cards.map((c: { case_id: number }) => c.case_id));
  });

  it("formats scores to three decimals", () => {
    renderResults(container, [card(1, { score: 0.1818181 })], noop);
    expect(container.querySelector(".score")?.textContent).toBe("0.182");
    expect(formatScore(2 / 11)).toBe("0.182");
    expect(formatScore(null)).toBe("");
  });

  it("passes the snippet through untouched", () => {
    const snippet = "Full-height glass facade panels.";
    renderResults(container, [card(3, { snippet })], noop);
    expect(container.querySelector(".snippet")?.textContent).toBe(snippet);
  });

  it("shows an empty-state message for zero cards", () => {
    renderResults(container, [], noop);
    expect(container.querySelector(".empty-state")).not.toBeNull();
    expect(container.querySelectorAll(".card")).toHaveLength(0);
  });

  it("wires like and open handlers", () => {
    const onLike = vi.fn();
    const onOpen = vi.fn();
    renderResults(container, [card(4)], { onLike, onOpen });
    (container.querySelector(".like") as HTMLElement).click();
    expect(onLike).toHaveBeenCalledWith(4);
    expect(onOpen).not.toHaveBeenCalled(); // like click must not open detail
    (container.querySelector(".card") as HTMLElement).click();
    expect(onOpen).toHaveBeenCalledWith(4);
  });

  it("lazy-loads thumbnails and shows a hover preview element", () => {
    renderResults(container, [card(6, { best_asset: { asset_id: "a", source_path: "a.png" } })], noop);
    const thumb = container.querySelector(".thumb") as HTMLElement;
    expect(thumb.getAttribute("loading")).toBe("lazy");
    expect(container.querySelector(".hover-preview")).not.toBeNull();
  });
});

describe("renderLikedRail", () => {
  it("lists liked cards with unlike buttons", () => {
    const onUnlike = vi.fn();
    renderLikedRail(container, [card(2), card(8)], onUnlike);
    const ids = [...container.querySelectorAll<HTMLElement>(".liked-card")].map((el) =>
      Number(el.dataset.caseId),
    );
    expect(ids).toEqual([2, 8]);
    (container.querySelector(".unlike") as HTMLElement).click();
    expect(onUnlike).toHaveBeenCalledWith(2);
  });

  it("collapses when empty", () => {
    renderLikedRail(container, [], () => {});
    expect(container.classList.contains("empty")).toBe(true);
  });
});

describe("renderSliders", () => {
  it("renders seven sliders bounded to [0, 1]", () => {
    renderSliders(container, {}, () => {});
    const sliders = [...container.querySelectorAll<HTMLInputElement>("input[type=range]")];
    expect(sliders).toHaveLength(7);
    expect(sliders.map((s) => s.dataset.aspect)).toEqual([...ASPECTS]);
    for (const slider of sliders) {
      expect(slider.min).toBe("0");
      expect(slider.max).toBe("1");
    }
  });

  it("emits the full weight map on input", () => {
    const onChange = vi.fn();
    renderSliders(container, { form: 0.4 }, onChange);
    const slider = container.querySelector("input[data-aspect=style]") as HTMLInputElement;
    slider.value = "0.2";
    slider.dispatchEvent(new Event("input"));
    expect(onChange).toHaveBeenCalledTimes(1);
    const weights = onChange.mock.calls[0][0];
    expect(weights.style).toBe(0.2);
    expect(weights.form).toBe(0.4);
    expect(Object.keys(weights)).toHaveLength(7);
  });
});

describe("renderAnalyses", () => {
  it("renders only non-empty aspects from the image golden", () => {
    const analyses = (queryImageGolden as any).response.analyses as Record<string, string[]>;
    renderAnalyses(container, analyses);
    const rendered = [...container.querySelectorAll<HTMLElement>(".analysis")].map(
      (el) => el.dataset.aspect,
    );
    const expected = ASPECTS.filter((a) => (analyses[a] ?? []).length > 0);
    expect(rendered).toEqual([...expected]);
  });
});
