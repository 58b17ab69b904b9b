import { StripApi } from "./api.js";
import { StripModel } from "./model.js";
import { createView } from "./view.js";

const RETRY_DELAY_MS = 2000;

async function pumpStream(api: StripApi, model: StripModel): Promise<never> {
  // Reconnect forever, resuming after the last covered sequence number.
  for (;;) {
    try {
      for await (const frame of api.events(model.seq)) {
        await model.ingest(frame);
      }
    } catch {
      // server restart or network blip; fall through to retry
    }
    await new Promise((resolve) => setTimeout(resolve, RETRY_DELAY_MS));
  }
}

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app mount point");

  const api = new StripApi("");
  const model = new StripModel(() => api.state());

  const state = await api.state();
  model.adoptSnapshot(state);

  let names: string[] = [];
  try {
    names = (await api.report()).outlets.map((o) => o.name);
  } catch {
    // report unavailable is fine; tiles fall back to outlet numbers
  }

  const view = createView(root, api, model, state, names);
  void view.refreshReport();
  void pumpStream(api, model);
}

void boot();
