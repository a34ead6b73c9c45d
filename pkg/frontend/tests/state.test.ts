import { describe, expect, it } from "vitest";

import {
  initialState,
  receiveError,
  receiveResponse,
  revealLowConfidence,
  setQuestion,
  setReportScope,
  startAsk,
  type UiState,
} from "../src/state.js";
import { response, view } from "./helpers.js";

describe("ask lifecycle", () => {
  it("startAsk sets loading, clears error, hides gated answers again", () => {
    let state: UiState = { ...initialState, error: "old", revealLowConfidence: true };
    state = startAsk(state);
    expect(state.loading).toBe(true);
    expect(state.error).toBeNull();
    expect(state.revealLowConfidence).toBe(false);
    expect(state.seq).toBe(1);
  });

  it("receiveResponse applies matching seq", () => {
    let state = startAsk(initialState);
    const body = response({ best: view("stable torque levels", 0.8) });
    state = receiveResponse(state, state.seq, "q", body);
    expect(state.loading).toBe(false);
    expect(state.response).toBe(body);
    expect(state.askedQuestion).toBe("q");
  });

  it("stale responses are dropped (last write wins)", () => {
    let state = startAsk(initialState); // seq 1
    const staleSeq = state.seq;
    state = startAsk(state); // seq 2 supersedes
    const fresh = response({ best: view("fresh", 0.9) });
    state = receiveResponse(state, state.seq, "new", fresh);
    const afterStale = receiveResponse(
      state,
      staleSeq,
      "old",
      response({ best: view("stale", 0.9) }),
    );
    expect(afterStale).toBe(state); // unchanged object: ignored
    expect(afterStale.response).toBe(fresh);
  });

  it("errors keep previous results visible", () => {
    let state = startAsk(initialState);
    const body = response({ best: view("kept", 0.7) });
    state = receiveResponse(state, state.seq, "q", body);
    state = startAsk(state);
    state = receiveError(state, state.seq, "boom");
    expect(state.error).toBe("boom");
    expect(state.response).toBe(body);
  });

  it("stale errors are dropped too", () => {
    let state = startAsk(initialState);
    const staleSeq = state.seq;
    state = startAsk(state);
    const after = receiveError(state, staleSeq, "late failure");
    expect(after).toBe(state);
  });
});

describe("reveal gating", () => {
  it("reveal is explicit and resets on every new ask", () => {
    let state = revealLowConfidence(initialState);
    expect(state.revealLowConfidence).toBe(true);
    state = startAsk(state);
    expect(state.revealLowConfidence).toBe(false);
  });
});

describe("pickers", () => {
  it("setQuestion stores the text verbatim", () => {
    const state = setQuestion(initialState, "  What margin?  ");
    expect(state.question).toBe("  What margin?  ");
  });

  it("setReportScope round-trips null for all-reports", () => {
    let state = setReportScope(initialState, "report03");
    expect(state.reportId).toBe("report03");
    state = setReportScope(state, null);
    expect(state.reportId).toBeNull();
  });
});
