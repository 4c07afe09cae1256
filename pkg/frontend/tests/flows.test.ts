import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { ApiClient } from "../src/api.js";
import { App, WEIGHTS_DEBOUNCE_MS, bootstrap } from "../src/app.js";
import { apiResult, card, gridOrder, mutationCalls, railOrder, stubFetch } from "./helpers.js";

let root: HTMLElement;

beforeEach(() => {
  document.body.innerHTML = "<div id='app'></div>";
  root = document.getElementById("app") as HTMLElement;
  sessionStorage.clear();
});

afterEach(() => {
  vi.useRealTimers();
});

function makeApp(): App {
  return new App(root, new ApiClient(), sessionStorage);
}

describe("rendered order mirrors the server", () => {
  it("every step of a text->like->unlike flow re-renders to the response order", async () => {
    const initial = apiResult([3, 1, 2]);
    const afterLike = apiResult([2, 3], { liked: [card(1)] });
    const afterUnlike = apiResult([3, 1, 2]);
    stubFetch({
      "POST /api/v1/query/text": initial,
      "POST /api/v1/session/sess-1/like": afterLike,
      "DELETE /api/v1/session/sess-1/like/1": afterUnlike,
    });
    const app = makeApp();

    await app.runTextQuery("glass facade");
    expect(gridOrder(root)).toEqual([3, 1, 2]);

    await app.likeCase(1);
    expect(gridOrder(root)).toEqual([2, 3]);
    expect(railOrder(root)).toEqual([1]);

    await app.unlikeCase(1);
    expect(gridOrder(root)).toEqual([3, 1, 2]);
    expect(railOrder(root)).toEqual([]);
  });

  it("never re-sorts client-side even when scores look shuffled", async () => {
    // descending-id order with ascending scores: DOM must keep server order
    const shuffled = apiResult([9, 4, 7]);
    shuffled.cards[0]!.score = 0.01;
    shuffled.cards[2]!.score = 0.99;
    stubFetch({ "POST /api/v1/query/text": shuffled });
    const app = makeApp();
    await app.runTextQuery("anything");
    expect(gridOrder(root)).toEqual([9, 4, 7]);
  });
});

describe("slider debounce", () => {
  function imageApp() {
    const first = apiResult([1, 2, 3], {
      weights: { form: 1, style: 1, material_usage: 1, sense_of_feeling: 1,
                 context_relations: 1, passive_design: 1, general_highlights: 1 },
      analyses: { form: ["A roofline."], style: [] },
    });
    const reweighted = apiResult([2, 1, 3], {
      weights: { form: 0.2, style: 1, material_usage: 1, sense_of_feeling: 1,
                 context_relations: 1, passive_design: 1, general_highlights: 1 },
    });
    const calls = stubFetch({
      "POST /api/v1/query/image": first,
      "POST /api/v1/session/sess-1/weights": reweighted,
    });
    return { app: makeApp(), calls };
  }

  it("a burst of slider moves issues exactly one request, then re-renders", async () => {
    const { app, calls } = imageApp();
    await app.runImageQuery(new Blob([new Uint8Array([1, 2, 3])]));
    expect(gridOrder(root)).toEqual([1, 2, 3]);

    vi.useFakeTimers();
    const slider = root.querySelector("input[data-aspect=form]") as HTMLInputElement;
    for (const value of ["0.8", "0.5", "0.2"]) {
      slider.value = value;
      slider.dispatchEvent(new Event("input"));
      vi.advanceTimersByTime(WEIGHTS_DEBOUNCE_MS - 50);
    }
    expect(mutationCalls(calls)).toHaveLength(0); // still inside the window
    await vi.advanceTimersByTimeAsync(WEIGHTS_DEBOUNCE_MS);
    vi.useRealTimers();
    await Promise.resolve();

    const weightCalls = mutationCalls(calls);
    expect(weightCalls).toEqual(["POST /api/v1/session/sess-1/weights"]);
    const sent = calls.find((c) => c.path.endsWith("/weights"))!.body as {
      weights: Record<string, number>;
    };
    expect(sent.weights.form).toBe(0.2); // latest slider value wins
    expect(gridOrder(root)).toEqual([2, 1, 3]); // server's new order in the DOM
  });

  it("all-zero sliders show inline validation and send nothing", async () => {
    const { app, calls } = imageApp();
    await app.runImageQuery(new Blob([new Uint8Array([1])]));

    vi.useFakeTimers();
    for (const slider of root.querySelectorAll<HTMLInputElement>("input[type=range]")) {
      slider.value = "0";
      slider.dispatchEvent(new Event("input"));
    }
    await vi.advanceTimersByTimeAsync(WEIGHTS_DEBOUNCE_MS * 2);
    vi.useRealTimers();

    expect(mutationCalls(calls)).toHaveLength(0);
    const warning = root.querySelector(".weights-warning") as HTMLElement;
    expect(warning.textContent).toContain("At least one");
  });
});

describe("session restore on reload", () => {
  it("bootstrap with a stored session id fetches and renders it", async () => {
    sessionStorage.setItem(
      "archseek.session",
      JSON.stringify({ session_id: "sess-1", mode: "text" }),
    );
    stubFetch({ "GET /api/v1/session/sess-1": apiResult([4, 2], { liked: [card(7)] }) });
    const app = bootstrap(root, new ApiClient(), sessionStorage);
    await vi.waitFor(() => expect(gridOrder(root)).toEqual([4, 2]));
    expect(railOrder(root)).toEqual([7]);
    expect(app.currentState?.session_id).toBe("sess-1");
  });

  it("a successful query stores the session id for the next load", async () => {
    stubFetch({ "POST /api/v1/query/text": apiResult([1]) });
    const app = makeApp();
    await app.runTextQuery("stone");
    const saved = JSON.parse(sessionStorage.getItem("archseek.session") ?? "{}");
    expect(saved.session_id).toBe("sess-1");
    expect(saved.mode).toBe("text");
  });

  it("a stale stored session falls back to a fresh start", async () => {
    sessionStorage.setItem(
      "archseek.session",
      JSON.stringify({ session_id: "gone", mode: "text" }),
    );
    stubFetch({}); // session GET will 404
    const app = bootstrap(root, new ApiClient(), sessionStorage);
    await new Promise((resolve) => setTimeout(resolve, 0));
    expect(app.currentState).toBeNull();
    expect(root.querySelectorAll(".card")).toHaveLength(0);
  });
});

describe("one in-flight mutation per session", () => {
  it("queues likes so they reach the server sequentially", async () => {
    let inFlight = 0;
    let maxInFlight = 0;
    const respond = (order: number[]) => async () => {
      inFlight += 1;
      maxInFlight = Math.max(maxInFlight, inFlight);
      await new Promise((resolve) => setTimeout(resolve, 5));
      inFlight -= 1;
      return apiResult(order);
    };
    stubFetch({
      "POST /api/v1/query/text": apiResult([1, 2, 3]),
      "POST /api/v1/session/sess-1/like": respond([2, 3]),
      "DELETE /api/v1/session/sess-1/like/1": respond([1, 2, 3]),
    });
    const app = makeApp();
    await app.runTextQuery("q");
    await Promise.all([app.likeCase(1), app.unlikeCase(1)]);
    expect(maxInFlight).toBe(1);
  });
});

describe("detail view", () => {
  it("clicking a card fetches the detail and hides the grid", async () => {
    stubFetch({
      "POST /api/v1/query/text": apiResult([5]),
      "GET /api/v1/cases/5": {
        case_id: 5,
        title: "Case 5",
        description: "A tall hall.",
        assets: [],
        entries_by_aspect: { form: [{ entry_id: "e", text: "A nave-like space.", origin: "x" }] },
        entry_count: 1,
      },
    });
    const app = makeApp();
    await app.runTextQuery("hall");
    (root.querySelector(".card") as HTMLElement).click();
    await vi.waitFor(() => {
      expect(root.querySelector(".detail.open")).not.toBeNull();
    });
    expect(root.querySelector(".detail h2")?.textContent).toBe("Case 5");
    expect(root.querySelector(".results")?.classList.contains("hidden")).toBe(true);
    (root.querySelector(".detail .close") as HTMLElement).click();
    expect(root.querySelector(".results")?.classList.contains("hidden")).toBe(false);
  });
});
