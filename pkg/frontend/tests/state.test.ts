import { describe, expect, it } from "vitest";

import type { TrialDescriptor } from "../src/session.js";
import { clampScore, TrialState } from "../src/state.js";

function trial(): TrialDescriptor {
  return {
    id: "t0",
    reference: { stimulus: "t0:REF" },
    stimuli: [
      { label: "S1", stimulus: "t0:S1" },
      { label: "S2", stimulus: "t0:S2" },
      { label: "S3", stimulus: "t0:S3" },
    ],
  };
}

describe("clampScore", () => {
  it.each([
    [-5, 0],
    [0, 0],
    [62.4, 62],
    [62.5, 63],
    [100, 100],
    [150, 100],
  ])("maps %s to %s", (input, expected) => {
    expect(clampScore(input)).toBe(expected);
  });

  it("rejects non-finite values", () => {
    expect(() => clampScore(Number.NaN)).toThrow(RangeError);
    expect(() => clampScore(Number.POSITIVE_INFINITY)).toThrow(RangeError);
  });
});

describe("TrialState auditioning", () => {
  it("tracks reference and stimulus flags independently", () => {
    const state = new TrialState(trial());
    state.markAuditioned("t0:REF");
    state.markAuditioned("t0:S1");
    expect(state.isAuditioned("t0:REF")).toBe(true);
    expect(state.isAuditioned("t0:S1")).toBe(true);
    expect(state.isAuditioned("t0:S2")).toBe(false);
  });

  it("rejects tokens from other trials", () => {
    const state = new TrialState(trial());
    expect(() => state.markAuditioned("t1:S1")).toThrow(RangeError);
  });

  it("the reference does not count toward the stimulus gate", () => {
    const state = new TrialState(trial());
    state.markAuditioned("t0:REF");
    state.markAuditioned("t0:S1");
    state.markAuditioned("t0:S2");
    for (const label of ["S1", "S2", "S3"]) state.setRating(label, 50);
    expect(state.allRated).toBe(true);
    expect(state.allAuditioned).toBe(false);
    expect(state.canSubmit).toBe(false);
    state.markAuditioned("t0:S3");
    expect(state.canSubmit).toBe(true);
  });
});

describe("TrialState ratings", () => {
  it("clamps and rounds stored scores", () => {
    const state = new TrialState(trial());
    expect(state.setRating("S1", 150)).toBe(100);
    expect(state.setRating("S2", -3)).toBe(0);
    expect(state.setRating("S3", 62.4)).toBe(62);
    expect(state.ratingOf("S1")).toBe(100);
    expect(state.ratingOf("S2")).toBe(0);
    expect(state.ratingOf("S3")).toBe(62);
  });

  it("reports untouched sliders as null", () => {
    const state = new TrialState(trial());
    expect(state.ratingOf("S1")).toBeNull();
    state.setRating("S1", 40);
    expect(state.ratingOf("S1")).toBe(40);
  });

  it("rejects unknown labels", () => {
    const state = new TrialState(trial());
    expect(() => state.setRating("S9", 50)).toThrow(RangeError);
  });
});

describe("TrialState submission gate", () => {
  function complete(state: TrialState): void {
    for (const { stimulus } of state.stimuli) state.markAuditioned(stimulus);
    for (const { label } of state.stimuli) state.setRating(label, 50);
  }

  it("blocks until every stimulus is played and every slider touched", () => {
    const state = new TrialState(trial());
    expect(state.canSubmit).toBe(false);
    for (const { stimulus } of state.stimuli) state.markAuditioned(stimulus);
    expect(state.canSubmit).toBe(false); // nothing rated yet
    state.setRating("S1", 10);
    state.setRating("S2", 20);
    expect(state.canSubmit).toBe(false); // one slider untouched
    state.setRating("S3", 30);
    expect(state.canSubmit).toBe(true);
  });

  it("refuses to build a submission while blocked", () => {
    const state = new TrialState(trial());
    expect(() => state.submission("tester")).toThrow(/incomplete/);
  });

  it("round-trips integer scores exactly, covering exactly the labels", () => {
    const state = new TrialState(trial());
    for (const { stimulus } of state.stimuli) state.markAuditioned(stimulus);
    state.setRating("S1", 0);
    state.setRating("S2", 37);
    state.setRating("S3", 100);
    const body = state.submission("tester", "2026-01-01T00:00:00Z");
    expect(body).toEqual({
      listener: "tester",
      trial: "t0",
      scores: { S1: 0, S2: 37, S3: 100 },
      timestamp: "2026-01-01T00:00:00Z",
    });
    expect(Object.values(body.scores).every(Number.isInteger)).toBe(true);
  });

  it("omits the timestamp when none is supplied", () => {
    const state = new TrialState(trial());
    complete(state);
    expect("timestamp" in state.submission("tester")).toBe(false);
  });

  it("returns a fresh scores object each time", () => {
    const state = new TrialState(trial());
    complete(state);
    const first = state.submission("tester");
    first.scores["S1"] = 99;
    expect(state.submission("tester").scores["S1"]).toBe(50);
  });
});
