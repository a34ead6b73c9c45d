import { renderApp, type Catalog } from "./render.js";
import {
  initialState,
  receiveError,
  receiveResponse,
  revealLowConfidence,
  setQuestion,
  setReportScope,
  startAsk,
  type UiState,
} from "./state.js";
import type { QaApi } from "./types.js";

export interface App {
  /** Resolves once predefined questions and report list are loaded. */
  ready: Promise<void>;
  getState(): UiState;
  /** Programmatic ask; resolves when the response (or error) is applied. */
  submit(): Promise<void>;
}

export function createApp(root: HTMLElement, api: QaApi): App {
  let state: UiState = initialState;
  const catalog: Catalog = { questions: [], reports: [] };

  function apply(next: UiState): void {
    if (next === state) return; // stale response dropped: nothing changed
    state = next;
    render();
  }

  async function submit(): Promise<void> {
    const question = state.question.trim();
    if (!question) return;
    apply(startAsk(state));
    const seq = state.seq;
    const scope = state.reportId;
    try {
      const response = await api.ask({
        question,
        ...(scope ? { report_id: scope } : {}),
      });
      apply(receiveResponse(state, seq, question, response));
    } catch (err) {
      apply(receiveError(state, seq, err instanceof Error ? err.message : String(err)));
    }
  }

  const handlers = {
    onQuestionInput(text: string): void {
      // keep typing smooth: track the value without re-rendering
      state = setQuestion(state, text);
    },
    onSubmit(): void {
      void submit();
    },
    onPickPredefined(question: string): void {
      apply(setQuestion(state, question));
    },
    onPickReport(docId: string | null): void {
      apply(setReportScope(state, docId));
    },
    onReveal(): void {
      apply(revealLowConfidence(state));
    },
  };

  function render(): void {
    root.replaceChildren(renderApp(state, catalog, handlers));
  }

  const ready = Promise.all([api.questions(), api.reports()])
    .then(([questions, reports]) => {
      catalog.questions = questions;
      catalog.reports = reports;
      render();
    })
    .catch(() => {
      render(); // catalog stays empty; asking still works
    });

  render();
  return { ready, getState: () => state, submit };
}
