import type { AskResponse } from "./types.js";

export interface UiState {
  question: string;
  reportId: string | null; // null = all reports
  loading: boolean;
  error: string | null;
  response: AskResponse | null;
  askedQuestion: string | null; // question the current response answers
  revealLowConfidence: boolean;
  seq: number; // id of the newest submitted ask; stale responses are dropped
}

export const initialState: UiState = {
  question: "",
  reportId: null,
  loading: false,
  error: null,
  response: null,
  askedQuestion: null,
  revealLowConfidence: false,
  seq: 0,
};

export function setQuestion(state: UiState, question: string): UiState {
  return { ...state, question };
}

export function setReportScope(state: UiState, reportId: string | null): UiState {
  return { ...state, reportId };
}

// Starting a new ask always re-hides gated answers and clears stale errors.
export function startAsk(state: UiState): UiState {
  return {
    ...state,
    loading: true,
    error: null,
    revealLowConfidence: false,
    seq: state.seq + 1,
  };
}

export function receiveResponse(
  state: UiState,
  seq: number,
  question: string,
  response: AskResponse,
): UiState {
  if (seq !== state.seq) return state; // a newer ask is in flight
  return {
    ...state,
    loading: false,
    error: null,
    response,
    askedQuestion: question,
    revealLowConfidence: false,
  };
}

// Failures keep the previous results on screen; only the banner changes.
export function receiveError(state: UiState, seq: number, message: string): UiState {
  if (seq !== state.seq) return state;
  return { ...state, loading: false, error: message };
}

export function revealLowConfidence(state: UiState): UiState {
  return { ...state, revealLowConfidence: true };
}
