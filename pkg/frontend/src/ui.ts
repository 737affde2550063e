/** DOM rendering for the rating flow. One full re-render per state change;
 * everything the rater sees is built here, so keeping system names out of
 * the interface reduces to this module never receiving them (it only gets
 * opaque stimulus ids, and shows those as "Sample k of N"). */

import { SCALE_LABELS, ViewState, progressLabel } from "./state.js";

export interface UiHandlers {
  onBegin(): void;
  onPlayEnded(): void;
  onRate(score: number): void;
  onRetryConnect(): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (text !== undefined) node.textContent = text;
  return node;
}

function renderLoading(root: HTMLElement): void {
  root.append(el("p", { id: "status", class: "status" }, "Connecting…"));
}

function renderUnreachable(root: HTMLElement, handlers: UiHandlers): void {
  root.append(
    el(
      "p",
      { id: "status", class: "status error" },
      "The rating service is not reachable right now. Nothing you entered has been lost.",
    ),
  );
  const retry = el("button", { id: "retry-btn", class: "primary" }, "Retry");
  retry.addEventListener("click", () => handlers.onRetryConnect());
  root.append(retry);
}

function renderInstructions(
  root: HTMLElement,
  instructions: string,
  handlers: UiHandlers,
): void {
  const box = el("div", { id: "instructions", class: "card" });
  box.append(el("h1", {}, "Listening test"));
  box.append(el("p", {}, instructions));
  const begin = el("button", { id: "begin-btn", class: "primary" }, "Begin");
  begin.addEventListener("click", () => handlers.onBegin());
  box.append(begin);
  root.append(box);
}

function renderRating(
  root: HTMLElement,
  view: ViewState,
  audioUrlFor: (stimulusId: string) => string,
  handlers: UiHandlers,
): void {
  const stimulusId = view.playlist[view.cursor];
  const card = el("div", { id: "rating", class: "card" });

  const header = el("div", { class: "rating-header" });
  header.append(el("h1", {}, "Listening test"));
  header.append(
    el("span", { id: "progress", class: "progress" }, progressLabel(view)),
  );
  card.append(header);

  card.append(
    el(
      "p",
      { id: "sample-label" },
      `Sample ${view.cursor + 1} of ${view.playlist.length}`,
    ),
  );

  const audio = el("audio", { id: "player", preload: "auto" });
  audio.src = audioUrlFor(stimulusId);
  audio.addEventListener("ended", () => handlers.onPlayEnded());
  card.append(audio);

  const play = el(
    "button",
    { id: "play-btn", class: "primary" },
    view.played ? "Replay" : "Play",
  );
  play.addEventListener("click", () => {
    void audio.play().catch(() => {
      // autoplay restrictions surface here; the rater just presses again
    });
  });
  card.append(play);

  if (!view.played) {
    card.append(
      el(
        "p",
        { id: "gate-hint", class: "hint" },
        "Listen to the sample all the way through, then rate it.",
      ),
    );
  }

  const locked = !view.played || view.submitting || view.pendingRetry;
  const scores = el("div", { id: "score-buttons", class: "scores" });
  for (let score = 1; score <= 5; score++) {
    const btn = el("button", { class: "score-btn", "data-score": String(score) });
    btn.append(el("span", { class: "score-num" }, String(score)));
    btn.append(el("span", { class: "score-word" }, SCALE_LABELS[score]));
    btn.disabled = locked;
    btn.addEventListener("click", () => handlers.onRate(score));
    scores.append(btn);
  }
  card.append(scores);

  if (view.submitting) {
    card.append(el("p", { id: "status", class: "status" }, "Saving…"));
  }
  if (view.pendingRetry) {
    card.append(
      el(
        "p",
        { id: "retry-banner", class: "status error" },
        "Could not reach the service; your rating is queued and will be retried.",
      ),
    );
  }
  root.append(card);
}

function renderComplete(root: HTMLElement, view: ViewState): void {
  const card = el("div", { id: "complete", class: "card" });
  card.append(el("h1", {}, "All done"));
  card.append(
    el(
      "p",
      {},
      `You rated ${view.playlist.length} samples. Thank you for taking part.`,
    ),
  );
  card.append(el("span", { id: "progress", class: "progress" }, progressLabel(view)));
  root.append(card);
}

export function render(
  root: HTMLElement,
  view: ViewState,
  audioUrlFor: (stimulusId: string) => string,
  instructions: string,
  handlers: UiHandlers,
): void {
  root.replaceChildren();
  switch (view.phase) {
    case "loading":
      renderLoading(root);
      break;
    case "unreachable":
      renderUnreachable(root, handlers);
      break;
    case "instructions":
      renderInstructions(root, instructions, handlers);
      break;
    case "rating":
      renderRating(root, view, audioUrlFor, handlers);
      break;
    case "complete":
      renderComplete(root, view);
      break;
  }
}
