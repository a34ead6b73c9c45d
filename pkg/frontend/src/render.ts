import { splitHighlight } from "./highlight.js";
import type { UiState } from "./state.js";
import type { AnswerView, ReportInfo } from "./types.js";

export interface Catalog {
  questions: string[];
  reports: ReportInfo[];
}

export interface Handlers {
  onQuestionInput(text: string): void;
  onSubmit(): void;
  onPickPredefined(question: string): void;
  onPickReport(docId: string | null): void;
  onReveal(): void;
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

function answerCard(view: AnswerView): HTMLElement {
  const card = el("article", "answer-card");

  const head = el("div", "answer-head");
  head.append(el("span", "answer-text", view.text));
  head.append(el("span", "answer-score", view.score.toFixed(3)));
  card.append(head);

  // Highlight strictly from the response offsets.
  const segments = splitHighlight(view.passage_text, view.highlight);
  const passage = el("p", "passage");
  passage.append(document.createTextNode(segments.before));
  const mark = el("mark", "answer-highlight", segments.marked);
  passage.append(mark);
  passage.append(document.createTextNode(segments.after));
  card.append(passage);

  const provenance = el("div", "provenance");
  const link = el("a", "doc-link", view.doc_title);
  link.setAttribute("href", view.source_uri);
  link.setAttribute("target", "_blank");
  link.setAttribute("rel", "noopener");
  provenance.append(link);
  provenance.append(el("span", "passage-ref", view.passage_id));
  card.append(provenance);
  return card;
}

function resultsSection(state: UiState, handlers: Handlers): HTMLElement {
  const section = el("section", "results");
  const response = state.response;
  if (!response) {
    if (!state.loading) {
      section.append(
        el("p", "idle-hint", "Ask a question about the indexed reports."),
      );
    }
    return section;
  }

  if (response.no_answer) {
    section.append(
      el("div", "no-answer", "No answer found for this question."),
    );
    return section;
  }

  if (response.best) {
    const bestBlock = el("div", "best");
    bestBlock.append(el("h2", "block-title", "Answer"));
    bestBlock.append(answerCard(response.best));
    section.append(bestBlock);
  }

  if (response.others.length > 0) {
    const details = el("details", "others"); // collapsed until opened
    const summary = el(
      "summary",
      "block-title",
      `Other possible answers (${response.others.length})`,
    );
    details.append(summary);
    for (const view of response.others) details.append(answerCard(view));
    section.append(details);
  }

  if (response.low_confidence.length > 0) {
    if (!state.revealLowConfidence) {
      // Gated answers stay out of the DOM entirely until revealed.
      const gate = el("div", "low-confidence-gate");
      gate.append(
        el(
          "p",
          "low-confidence-warning",
          "The system's confidence in the remaining answers is low.",
        ),
      );
      const reveal = el(
        "button",
        "reveal-low-confidence",
        `Show ${response.low_confidence.length} low-confidence answer(s)`,
      );
      reveal.setAttribute("type", "button");
      reveal.addEventListener("click", () => handlers.onReveal());
      gate.append(reveal);
      section.append(gate);
    } else {
      const block = el("div", "low-confidence");
      block.append(el("h2", "block-title", "Low-confidence answers"));
      for (const view of response.low_confidence) {
        block.append(answerCard(view));
      }
      section.append(block);
    }
  }

  if (response.warnings.length > 0) {
    const notes = el("ul", "warnings");
    for (const warning of response.warnings) {
      notes.append(el("li", "warning", warning));
    }
    section.append(notes);
  }
  return section;
}

export function renderApp(
  state: UiState,
  catalog: Catalog,
  handlers: Handlers,
): HTMLElement {
  const app = el("div", "app");

  const header = el("header");
  header.append(el("h1", undefined, "Report QA"));
  header.append(
    el("p", "tagline", "Extractive question answering over technical reports"),
  );
  app.append(header);

  const form = el("form", "ask-bar");
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    handlers.onSubmit();
  });
  const input = el("input", "question-input");
  input.setAttribute("type", "text");
  input.setAttribute("name", "question");
  input.setAttribute("placeholder", "Type a question…");
  input.value = state.question;
  input.addEventListener("input", () => handlers.onQuestionInput(input.value));
  form.append(input);
  const submit = el("button", "ask-button", state.loading ? "Asking…" : "Ask");
  submit.setAttribute("type", "submit");
  form.append(submit);
  app.append(form);

  const pickers = el("div", "pickers");

  const predefined = el("select", "predefined-questions");
  const promptOption = el("option", undefined, "Predefined questions…");
  promptOption.setAttribute("value", "");
  predefined.append(promptOption);
  for (const question of catalog.questions) {
    const option = el("option", undefined, question);
    option.setAttribute("value", question);
    predefined.append(option);
  }
  predefined.addEventListener("change", () => {
    if (predefined.value) handlers.onPickPredefined(predefined.value);
  });
  pickers.append(predefined);

  const scope = el("select", "report-scope");
  const allOption = el("option", undefined, "All reports");
  allOption.setAttribute("value", "");
  scope.append(allOption);
  for (const report of catalog.reports) {
    const option = el("option", undefined, report.title);
    option.setAttribute("value", report.doc_id);
    scope.append(option);
  }
  scope.value = state.reportId ?? "";
  scope.addEventListener("change", () => {
    handlers.onPickReport(scope.value === "" ? null : scope.value);
  });
  pickers.append(scope);
  app.append(pickers);

  if (state.error) {
    app.append(el("div", "error-banner", `Request failed: ${state.error}`));
  }
  app.append(resultsSection(state, handlers));
  return app;
}
