/** Wires the state machine to the DOM. Exported separately from the
 * bootstrap file so tests can boot the app against any service and storage. */

import { ApiClient, fetchInstructions } from "./api.js";
import { SessionController, StorageLike } from "./state.js";
import { UiHandlers, render } from "./ui.js";

export interface BootResult {
  controller: SessionController;
}

export async function boot(
  root: HTMLElement,
  api: ApiClient,
  storage: StorageLike,
  retryDelayMs = 4000,
): Promise<BootResult> {
  const instructions = await fetchInstructions(api.base);

  let controller: SessionController;
  const handlers: UiHandlers = {
    onBegin: () => controller.beginRating(),
    onPlayEnded: () => controller.markPlayed(),
    onRate: (score) => void controller.rate(score),
    onRetryConnect: () => void controller.retryConnect(),
  };
  controller = new SessionController(
    api,
    storage,
    (view) => render(root, view, (id) => api.audioUrl(id), instructions, handlers),
    { retryDelayMs },
  );

  await controller.startOrResume();
  return { controller };
}
