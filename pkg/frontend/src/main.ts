/** DOM wiring: query picker -> rating grid -> refined results. */

import { ApiClient, ApiError, type ResultEntry } from "./api.js";
import { SessionView } from "./state.js";

const client = new ApiClient("");

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function resultCard(entry: ResultEntry): HTMLElement {
  const card = el("div", "card");
  const img = el("img");
  img.src = client.imageUrl(entry);
  img.alt = entry.id;
  card.append(img);
  card.append(el("div", "card-id", entry.id));
  card.append(el("div", "card-labels", entry.labels.join(", ")));
  card.append(el("div", "card-score", entry.score.toFixed(4)));
  return card;
}

function renderGrid(entries: ResultEntry[]): HTMLElement {
  const grid = el("div", "grid");
  for (const entry of entries) grid.append(resultCard(entry));
  return grid;
}

class App {
  private view: SessionView | null = null;
  private readonly root: HTMLElement;
  private banner: HTMLElement;
  private stage: HTMLElement;

  constructor(root: HTMLElement) {
    this.root = root;
    this.banner = el("div", "banner hidden");
    this.stage = el("div", "stage");
    this.root.append(this.banner, this.stage);
  }

  async start(): Promise<void> {
    const summary = await client.corpusSummary();

    const form = el("div", "query-form");
    form.append(
      el(
        "div",
        "summary",
        `${summary.count} items, dim ${summary.dim}, ` +
          `${Object.keys(summary.label_histogram).length} labels`,
      ),
    );
    const select = el("select");
    for (const id of summary.sample_ids) {
      const option = el("option", undefined, id);
      option.value = id;
      select.append(option);
    }
    const button = el("button", "primary", "Start session");
    button.addEventListener("click", () => {
      void this.createSession(select.value);
    });
    form.append(select, button);
    this.stage.replaceChildren(form);
  }

  private setBanner(text: string | null, kind = "error"): void {
    if (text === null) {
      this.banner.className = "banner hidden";
      this.banner.textContent = "";
    } else {
      this.banner.className = `banner ${kind}`;
      this.banner.textContent = text;
    }
  }

  private async createSession(queryId: string): Promise<void> {
    this.setBanner(null);
    try {
      const created = await client.createSession({ query_id: queryId });
      this.view = new SessionView(created.session_id, created.results);
      this.renderRating(queryId);
    } catch (err) {
      this.setBanner(err instanceof ApiError ? err.message : String(err));
    }
  }

  private renderRating(queryId: string): void {
    const view = this.view;
    if (!view) return;

    const heading = el("h2", undefined, `Rate results for query ${queryId}`);
    const grid = el("div", "grid");
    const submit = el("button", "primary", "Submit feedback");
    const progress = el("div", "progress");

    const refresh = () => {
      submit.disabled = !view.allRated;
      progress.textContent = `${view.ratedCount} / ${view.cards.length} rated`;
    };

    view.cards.forEach((card, index) => {
      const node = resultCard(card.entry);
      const controls = el("div", "rating");
      const yes = el("button", "vote yes", "Relevant");
      const no = el("button", "vote no", "Irrelevant");
      const update = () => {
        yes.classList.toggle("selected", card.bit === 1);
        no.classList.toggle("selected", card.bit === 0);
        refresh();
      };
      yes.addEventListener("click", () => {
        view.setBit(index, card.bit === 1 ? null : 1);
        update();
      });
      no.addEventListener("click", () => {
        view.setBit(index, card.bit === 0 ? null : 0);
        update();
      });
      controls.append(yes, no);
      node.append(controls);
      grid.append(node);
    });

    submit.addEventListener("click", () => {
      void this.submit();
    });
    refresh();
    this.stage.replaceChildren(heading, progress, grid, submit);
  }

  private async submit(): Promise<void> {
    const view = this.view;
    if (!view || !view.allRated) return;
    view.phase = "submitting";
    try {
      const response = await client.submitFeedback(view.sessionId, view.bits());
      view.applyFeedback(response);
    } catch (err) {
      view.phase = "rating";
      this.setBanner(err instanceof ApiError ? err.message : String(err));
      return;
    }
    this.renderOutcome();
  }

  private renderOutcome(): void {
    const view = this.view;
    if (!view) return;
    const pieces: HTMLElement[] = [];

    if (view.phase === "failed") {
      this.setBanner(
        "No items matched your feedback; showing the unrefined ranking only.",
        "failure",
      );
    } else {
      this.setBanner(null);
      pieces.push(el("h2", undefined, "Refined results"));
      pieces.push(renderGrid(view.refined ?? []));
    }

    const toggle = el("button", undefined, "Compare with plain similarity");
    const controlWrap = el("div", "control hidden");
    controlWrap.append(el("h2", undefined, "Plain similarity (no feedback)"));
    controlWrap.append(renderGrid(view.control ?? []));
    toggle.addEventListener("click", () => {
      view.showControl = !view.showControl;
      controlWrap.classList.toggle("hidden", !view.showControl);
    });
    pieces.push(toggle, controlWrap);

    const again = el("button", "primary", "New session");
    again.addEventListener("click", () => {
      this.view = null;
      void this.start();
    });
    pieces.push(again);
    this.stage.replaceChildren(...pieces);
  }
}

declare global {
  interface Window {
    rfirApp?: App;
  }
}

const root = document.getElementById("app");
if (root) {
  const app = new App(root);
  window.rfirApp = app;
  void app.start();
}
