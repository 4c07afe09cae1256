import { ApiClient, ApiError } from "./api.js";
import { debounce } from "./debounce.js";
import {
  renderAnalyses,
  renderDetail,
  renderError,
  renderLikedRail,
  renderResults,
  renderSliders,
} from "./render.js";
import { applyResult, loadSavedSession, saveSession } from "./state.js";
import type { ApiResult, Mode, UiSessionState } from "./types.js";
import { ASPECTS } from "./types.js";

export const WEIGHTS_DEBOUNCE_MS = 300;

const LAYOUT = `
  <header>
    <h1>archseek</h1>
    <form class="search-form">
      <input type="search" name="query" placeholder="Describe a design idea…" />
      <button type="submit" class="find">Find</button>
    </form>
    <div class="image-form">
      <input type="file" class="image-input" accept="image/png,image/jpeg" />
      <button type="button" class="browse">Surprise me</button>
    </div>
    <p class="error" role="alert"></p>
  </header>
  <aside class="side">
    <section class="weights hidden">
      <h3>Aspect weights</h3>
      <div class="sliders"></div>
      <p class="weights-warning" role="alert"></p>
    </section>
    <section class="analyses"></section>
    <section class="liked-rail" aria-label="liked cases"></section>
  </aside>
  <main>
    <div class="results"></div>
    <div class="detail"></div>
  </main>
`;

export class App {
  private state: UiSessionState | null = null;
  private pendingWeights = debounce(
    (weights: Record<string, number>) => void this.pushWeights(weights),
    WEIGHTS_DEBOUNCE_MS,
  );

  private readonly results: HTMLElement;
  private readonly rail: HTMLElement;
  private readonly sliders: HTMLElement;
  private readonly weightsBox: HTMLElement;
  private readonly weightsWarning: HTMLElement;
  private readonly analyses: HTMLElement;
  private readonly detail: HTMLElement;
  private readonly error: HTMLElement;

  constructor(
    private readonly root: HTMLElement,
    private readonly client: ApiClient,
    private readonly storage: Storage,
  ) {
    root.innerHTML = LAYOUT;
    this.results = root.querySelector(".results") as HTMLElement;
    this.rail = root.querySelector(".liked-rail") as HTMLElement;
    this.sliders = root.querySelector(".sliders") as HTMLElement;
    this.weightsBox = root.querySelector(".weights") as HTMLElement;
    this.weightsWarning = root.querySelector(".weights-warning") as HTMLElement;
    this.analyses = root.querySelector(".analyses") as HTMLElement;
    this.detail = root.querySelector(".detail") as HTMLElement;
    this.error = root.querySelector(".error") as HTMLElement;

    const form = root.querySelector(".search-form") as HTMLFormElement;
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      const input = form.querySelector("input[name=query]") as HTMLInputElement;
      if (input.value.trim()) void this.runTextQuery(input.value.trim());
    });

    const imageInput = root.querySelector(".image-input") as HTMLInputElement;
    imageInput.addEventListener("change", () => {
      const file = imageInput.files?.[0];
      if (file) void this.runImageQuery(file);
    });

    (root.querySelector(".browse") as HTMLElement).addEventListener("click", () =>
      void this.runBrowse(),
    );
  }

  /** Restore the stored session if the server still knows it. */
  async start(): Promise<void> {
    const saved = loadSavedSession(this.storage);
    if (!saved) return;
    try {
      const result = await this.client.session(saved.session_id);
      this.adopt(result, saved.mode);
    } catch {
      // stale session id: start fresh silently
    }
  }

  private adopt(result: ApiResult, mode: Mode): void {
    this.state = applyResult(this.state, result, mode);
    saveSession(this.state, this.storage);
    this.renderAll();
  }

  private renderAll(): void {
    if (!this.state) return;
    renderError(this.error, null);
    this.detail.replaceChildren();
    this.detail.classList.remove("open");
    renderResults(this.results, this.state.cards, {
      onLike: (caseId) => void this.likeCase(caseId),
      onOpen: (caseId) => void this.openDetail(caseId),
    });
    renderLikedRail(
      this.rail,
      this.state.liked.map(
        (caseId) =>
          this.state?.cards.find((c) => c.case_id === caseId) ?? {
            case_id: caseId,
            title: `Case ${caseId}`,
            score: null,
            snippet: null,
            best_aspect: null,
            best_asset: null,
            aspect_tags: [],
          },
      ),
      (caseId) => void this.unlikeCase(caseId),
    );
    const imageMode = this.state.mode === "image";
    this.weightsBox.classList.toggle("hidden", !imageMode);
    if (imageMode) {
      renderSliders(this.sliders, this.state.weights, (weights) =>
        this.onSliderChange(weights),
      );
      renderAnalyses(this.analyses, this.state.analyses);
    } else {
      this.sliders.replaceChildren();
      this.analyses.replaceChildren();
    }
  }

  private showError(err: unknown): void {
    const message = err instanceof ApiError ? err.message : "request failed";
    renderError(this.error, message);
  }

  async runTextQuery(query: string): Promise<void> {
    try {
      this.adopt(await this.client.textQuery(query), "text");
    } catch (err) {
      this.showError(err);
    }
  }

  async runImageQuery(file: File | Blob): Promise<void> {
    try {
      this.adopt(await this.client.imageQuery(file), "image");
    } catch (err) {
      this.showError(err);
    }
  }

  async runBrowse(seed?: number): Promise<void> {
    try {
      this.adopt(await this.client.browse(seed), "browse");
    } catch (err) {
      this.showError(err);
    }
  }

  /** Slider input: validate locally, then debounce to one server call. */
  onSliderChange(weights: Record<string, number>): void {
    if (!this.state) return;
    this.state.weights = weights;
    const allZero = ASPECTS.every((aspect) => (weights[aspect] ?? 0) === 0);
    if (allZero) {
      this.pendingWeights.cancel();
      renderError(this.weightsWarning, "At least one weight must be positive.");
      return;
    }
    renderError(this.weightsWarning, null);
    this.pendingWeights(weights);
  }

  private async pushWeights(weights: Record<string, number>): Promise<void> {
    if (!this.state) return;
    try {
      this.adopt(await this.client.setWeights(this.state.session_id, weights), "image");
    } catch (err) {
      this.showError(err);
    }
  }

  async likeCase(caseId: number): Promise<void> {
    if (!this.state) return;
    try {
      this.adopt(await this.client.like(this.state.session_id, caseId), this.state.mode);
    } catch (err) {
      this.showError(err);
    }
  }

  async unlikeCase(caseId: number): Promise<void> {
    if (!this.state) return;
    try {
      this.adopt(await this.client.unlike(this.state.session_id, caseId), this.state.mode);
    } catch (err) {
      this.showError(err);
    }
  }

  async openDetail(caseId: number): Promise<void> {
    try {
      const detail = await this.client.caseDetail(caseId);
      this.results.classList.add("hidden");
      renderDetail(this.detail, detail, () => {
        this.results.classList.remove("hidden");
        this.detail.replaceChildren();
        this.detail.classList.remove("open");
      });
    } catch (err) {
      this.showError(err);
    }
  }

  get currentState(): UiSessionState | null {
    return this.state;
  }
}

export function bootstrap(
  root: HTMLElement,
  client: ApiClient = new ApiClient(),
  storage: Storage = sessionStorage,
): App {
  const app = new App(root, client, storage);
  void app.start();
  return app;
}

declare global {
  interface Window {
    archseekApp?: App;
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  window.archseekApp = bootstrap(document.getElementById("app") as HTMLElement);
}
