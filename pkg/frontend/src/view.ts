import type { StripApi } from "./api.js";
import type { StripModel } from "./model.js";
import type { EventFrame, ReportDoc, StateDoc } from "./types.js";
import { sparklinePath } from "./sparkline.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const SPARK_W = 560;
const SPARK_H = 96;

export interface View {
  refreshReport(): Promise<void>;
}

export function formatClock(timeS: number): string {
  const total = Math.floor(timeS);
  const days = Math.floor(total / 86400);
  const hh = String(Math.floor((total % 86400) / 3600)).padStart(2, "0");
  const mm = String(Math.floor((total % 3600) / 60)).padStart(2, "0");
  const ss = String(total % 60).padStart(2, "0");
  return days > 0 ? `${days}d ${hh}:${mm}:${ss}` : `${hh}:${mm}:${ss}`;
}

export function formatShare(share: number | null): string {
  return share === null ? "n/a" : `${(share * 100).toFixed(1)}%`;
}

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

export function createView(
  root: HTMLElement,
  api: StripApi,
  model: StripModel,
  state: StateDoc,
  outletNames: string[],
): View {
  root.textContent = "";

  const header = el("header");
  header.append(el("h1", "", "phantom strip"));
  const clock = el("span", "clock", "00:00:00");
  const instant = el("span", "instant", "0 W");
  const energy = el("span", "energy", "0 Wh");
  const share = el("span", "share", "standby n/a");
  const status = el("span", "status", "live");
  header.append(clock, instant, energy, share, status);
  root.append(header);

  const controls = el("div", "controls");
  const master = el("button", "master", "master");
  master.addEventListener("click", () => void api.press({ button: "master" }).catch(flagError));
  controls.append(master);
  for (let i = 0; i < state.outlet_count; i++) {
    const button = el("button", "outlet-btn", `outlet ${i + 1}`);
    button.addEventListener("click", () =>
      void api.press({ button: "outlet", index: i }).catch(flagError),
    );
    controls.append(button);
  }
  for (const macro of state.macros) {
    const button = el("button", "macro-btn", `macro ${macro.id}`);
    button.addEventListener("click", () =>
      void api.press({ button: "macro", id: macro.id }).catch(flagError),
    );
    controls.append(button);
  }
  if (state.virtual_clock) {
    for (const [label, seconds] of [["+1m", 60], ["+15m", 900], ["+1h", 3600]] as const) {
      const button = el("button", "tick-btn", label);
      button.addEventListener("click", () => void api.tick(seconds).catch(flagError));
      controls.append(button);
    }
  }
  root.append(controls);

  const tiles: { box: HTMLElement; draw: HTMLElement; mode: HTMLElement }[] = [];
  const outlets = el("div", "outlets");
  for (let i = 0; i < state.outlet_count; i++) {
    const box = el("div", "tile off");
    box.append(el("div", "tile-name", outletNames[i] ?? `outlet ${i + 1}`));
    const draw = el("div", "tile-draw", "0 W");
    const mode = el("div", "tile-mode", "");
    box.append(draw, mode);
    outlets.append(box);
    tiles.push({ box, draw, mode });
  }
  root.append(outlets);

  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${SPARK_W} ${SPARK_H}`);
  svg.setAttribute("class", "sparkline");
  const path = document.createElementNS(SVG_NS, "path");
  path.setAttribute("fill", "none");
  svg.append(path);
  root.append(svg);

  const reportBox = el("section", "report");
  const reportButton = el("button", "report-btn", "refresh report");
  const reportTable = el("table", "report-table");
  reportBox.append(reportButton, reportTable);
  root.append(reportBox);

  function flagError(err: unknown): void {
    status.textContent = `error: ${err instanceof Error ? err.message : String(err)}`;
    status.classList.add("error");
  }

  function applyFrame(frame: EventFrame): void {
    clock.textContent = formatClock(frame.time_s);
    instant.textContent = `${frame.totals.instant_w.toFixed(1)} W`;
    energy.textContent = `${frame.totals.energy_wh.toFixed(1)} Wh`;
    share.textContent = `standby ${formatShare(frame.totals.standby_share)}`;
    frame.outlets.forEach((outlet, i) => {
      const tile = tiles[i];
      if (!tile) return;
      tile.box.className = outlet.powered ? "tile on" : "tile off";
      tile.draw.textContent = `${outlet.draw_w.toFixed(1)} W`;
      tile.mode.textContent = outlet.powered ? outlet.mode.replace("_", " ") : "unpowered";
    });
    path.setAttribute("d", sparklinePath(model.powerHistory, SPARK_W, SPARK_H));
  }

  function renderReport(report: ReportDoc): void {
    reportTable.textContent = "";
    const head = el("tr");
    for (const label of ["appliance", "total Wh", "standby Wh"]) {
      head.append(el("th", "", label));
    }
    reportTable.append(head);
    for (const outlet of report.outlets) {
      const standby =
        (outlet.by_mode["active_standby"] ?? 0) + (outlet.by_mode["passive_standby"] ?? 0);
      const row = el("tr");
      row.append(el("td", "", outlet.name));
      row.append(el("td", "", outlet.total_wh.toFixed(3)));
      row.append(el("td", "", standby.toFixed(3)));
      reportTable.append(row);
    }
    const totals = el("tr", "totals");
    totals.append(el("td", "", "total (with relay overhead)"));
    totals.append(el("td", "", report.total_wh.toFixed(3)));
    totals.append(el("td", "", report.standby_wh.toFixed(3)));
    reportTable.append(totals);
    if (report.baseline_total_wh !== null && report.savings_vs_baseline_wh !== null) {
      const savings = el("tr", "savings");
      savings.append(el("td", "", "saved vs always-on"));
      savings.append(el("td", "", report.savings_vs_baseline_wh.toFixed(3)));
      savings.append(el("td", "", formatShare(report.savings_share)));
      reportTable.append(savings);
    }
  }

  async function refreshReport(): Promise<void> {
    try {
      renderReport(await api.report());
    } catch (err) {
      flagError(err);
    }
  }

  reportButton.addEventListener("click", () => void refreshReport());
  model.onFrame(applyFrame);
  applyFrame(state.frame);

  return { refreshReport };
}
