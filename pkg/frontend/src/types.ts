// Wire types for the control service (see docs/api.md in the repo root).

export interface OutletFrame {
  powered: boolean;
  draw_w: number;
  mode: string;
}

export interface FrameTotals {
  instant_w: number;
  energy_wh: number;
  standby_share: number | null;
}

export interface EventFrame {
  seq: number;
  time_s: number;
  outlets: OutletFrame[];
  totals: FrameTotals;
}

export interface ActionDoc {
  type: "toggle" | "master" | "macro" | "noop";
  outlet?: number;
  id?: number;
}

export interface ButtonEntry {
  address: number;
  command: number;
  action: ActionDoc;
}

export interface MacroDoc {
  id: number;
  body: ActionDoc[];
}

export interface StateDoc {
  outlet_count: number;
  buttons: ButtonEntry[];
  macros: MacroDoc[];
  frame: EventFrame;
  virtual_clock: boolean;
  time_factor: number;
}

export interface OutletReport {
  name: string;
  by_mode: Record<string, number>;
  total_wh: number;
}

export interface ReportDoc {
  schema_version: number;
  horizon_s: number;
  outlets: OutletReport[];
  overhead_wh: number;
  total_wh: number;
  standby_wh: number;
  standby_share: number | null;
  aggregate_passive_standby_w: number;
  within_typical_home_band: boolean;
  baseline_total_wh: number | null;
  savings_vs_baseline_wh: number | null;
  savings_share: number | null;
}

export interface Transition {
  outlet: number;
  was_on: boolean;
  now_on: boolean;
  time_s: number;
}

export interface PressAck {
  applied_action: ActionDoc;
  transitions: Transition[];
  frame: EventFrame;
}

export type PressBody =
  | { button: "master" }
  | { button: "outlet"; index: number }
  | { button: "macro"; id: number }
  | { raw_frame: { address: number; command: number } };
