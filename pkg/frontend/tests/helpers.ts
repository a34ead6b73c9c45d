import type { AnswerView, AskRequest, AskResponse, QaApi, ReportInfo } from "../src/types.js";

export function view(
  text: string,
  score: number,
  options: { before?: string; after?: string; docId?: string } = {},
): AnswerView {
  const before = options.before ?? "Context sentence first. ";
  const after = options.after ?? " Trailing context follows.";
  const docId = options.docId ?? "report00";
  return {
    text,
    score,
    confident: score > 0.5,
    passage_id: `${docId}:0000`,
    passage_text: `${before}${text}${after}`,
    highlight: [before.length, before.length + text.length],
    doc_id: docId,
    doc_title: `Study ${docId}`,
    source_uri: `https://example.org/${docId}.pdf`,
  };
}

export function response(partial: Partial<AskResponse> = {}): AskResponse {
  return {
    best: null,
    others: [],
    low_confidence: [],
    no_answer: false,
    warnings: [],
    ...partial,
  };
}

export interface MockApi extends QaApi {
  calls: AskRequest[];
}

export function mockApi(
  askImpl: (request: AskRequest) => Promise<AskResponse>,
  options: { questions?: string[]; reports?: ReportInfo[] } = {},
): MockApi {
  const calls: AskRequest[] = [];
  return {
    calls,
    ask(request) {
      calls.push(request);
      return askImpl(request);
    },
    questions: () => Promise.resolve(options.questions ?? []),
    reports: () => Promise.resolve(options.reports ?? []),
  };
}

export function deferred<T>() {
  let resolve!: (value: T) => void;
  let reject!: (reason?: unknown) => void;
  const promise = new Promise<T>((res, rej) => {
    resolve = res;
    reject = rej;
  });
  return { promise, resolve, reject };
}

export function flush(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}
