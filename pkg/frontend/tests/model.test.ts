import { describe, expect, it } from "vitest";

import { StripModel } from "../src/model.js";
import type { EventFrame, StateDoc } from "../src/types.js";

function frame(seq: number, watts = 10, timeS = seq): EventFrame {
  return {
    seq,
    time_s: timeS,
    outlets: [{ powered: true, draw_w: watts, mode: "passive_standby" }],
    totals: { instant_w: watts, energy_wh: 0, standby_share: null },
  };
}

function snapshot(seq: number, watts = 99): StateDoc {
  return {
    outlet_count: 1,
    buttons: [],
    macros: [],
    frame: frame(seq, watts),
    virtual_clock: true,
    time_factor: 60,
  };
}

describe("StripModel", () => {
  it("accepts contiguous frames without refetching", async () => {
    let calls = 0;
    const model = new StripModel(async () => {
      calls++;
      return snapshot(9);
    });
    for (const seq of [1, 2, 3]) await model.ingest(frame(seq));
    expect(calls).toBe(0);
    expect(model.frame?.seq).toBe(3);
    expect(model.seq).toBe(3);
    expect(model.powerHistory.length).toBe(3);
  });

  it("refetches state exactly once on a sequence gap", async () => {
    let calls = 0;
    const model = new StripModel(async () => {
      calls++;
      return snapshot(8, 55);
    });
    await model.ingest(frame(1));
    await model.ingest(frame(5)); // gap: 2..4 missing
    expect(calls).toBe(1);
    // the snapshot (labeled one past the last emitted frame) wins
    expect(model.frame?.totals.instant_w).toBe(55);
    expect(model.seq).toBe(7);
    // the next emitted frame reuses the snapshot's number and must land
    await model.ingest(frame(8, 12));
    expect(calls).toBe(1);
    expect(model.frame?.totals.instant_w).toBe(12);
  });

  it("takes the gap frame itself if the snapshot does not cover it", async () => {
    const model = new StripModel(async () => snapshot(5, 55));
    await model.ingest(frame(1));
    await model.ingest(frame(5, 20));
    expect(model.frame?.totals.instant_w).toBe(20);
    expect(model.seq).toBe(5);
  });

  it("drops replayed duplicates", async () => {
    const model = new StripModel(async () => snapshot(9));
    await model.ingest(frame(3, 30));
    await model.ingest(frame(2, 99));
    expect(model.frame?.totals.instant_w).toBe(30);
  });

  it("adopting a snapshot leaves room for the frame sharing its number", async () => {
    const model = new StripModel(async () => snapshot(9));
    model.adoptSnapshot(snapshot(4, 44));
    expect(model.seq).toBe(3);
    await model.ingest(frame(4, 11));
    expect(model.frame?.totals.instant_w).toBe(11);
    expect(model.seq).toBe(4);
  });

  it("bounds the power history", async () => {
    const model = new StripModel(async () => snapshot(9_999));
    for (let seq = 1; seq <= 650; seq++) await model.ingest(frame(seq));
    expect(model.powerHistory.length).toBe(600);
    expect(model.powerHistory[0].timeS).toBe(51);
  });

  it("notifies frame listeners", async () => {
    const model = new StripModel(async () => snapshot(9));
    const seen: number[] = [];
    model.onFrame((f) => seen.push(f.seq));
    await model.ingest(frame(1));
    await model.ingest(frame(2));
    expect(seen).toEqual([1, 2]);
  });
});
