import { describe, expect, it } from "vitest";

import { applyFailure, applyWinprob, initialState } from "../src/app.js";
import { RequestSequencer } from "../src/sequencer.js";

describe("RequestSequencer", () => {
  it("only the newest token is current", () => {
    const seq = new RequestSequencer();
    const first = seq.begin();
    const second = seq.begin();
    expect(seq.isCurrent(first)).toBe(false);
    expect(seq.isCurrent(second)).toBe(true);
  });

  it("a stale response cannot overwrite a newer one", () => {
    const seq = new RequestSequencer();
    const slow = seq.begin();
    const fast = seq.begin();
    let state = initialState();
    state = applyWinprob(state, seq, fast, 100, { p_home: 0.7, model_type: "glm" });
    const after = applyWinprob(state, seq, slow, 50, { p_home: 0.2, model_type: "glm" });
    expect(after).toBe(state);
    expect(after.current?.p_home).toBe(0.7);
    expect(after.timeline).toHaveLength(1);
  });

  it("a stale failure does not raise a banner over a fresh value", () => {
    const seq = new RequestSequencer();
    const slow = seq.begin();
    const fast = seq.begin();
    let state = initialState();
    state = applyWinprob(state, seq, fast, 100, { p_home: 0.7, model_type: "glm" });
    const after = applyFailure(state, seq, slow, "service unreachable: timeout");
    expect(after).toBe(state);
    expect(after.banner).toBeNull();
  });

  it("a current failure clears the displayed value", () => {
    const seq = new RequestSequencer();
    let state = initialState();
    const t1 = seq.begin();
    state = applyWinprob(state, seq, t1, 100, { p_home: 0.7, model_type: "glm" });
    const t2 = seq.begin();
    state = applyFailure(state, seq, t2, "service unreachable: refused");
    expect(state.banner).toMatch(/unreachable/);
    expect(state.current).toBeNull();
  });
});
