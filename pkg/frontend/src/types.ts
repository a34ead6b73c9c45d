// Wire types mirroring the service's JSON responses.

export interface AnswerView {
  text: string;
  score: number;
  confident: boolean;
  passage_id: string;
  passage_text: string;
  highlight: [number, number];
  doc_id: string;
  doc_title: string;
  source_uri: string;
}

export interface AskResponse {
  best: AnswerView | null;
  others: AnswerView[];
  low_confidence: AnswerView[];
  no_answer: boolean;
  warnings: string[];
}

export interface AskRequest {
  question: string;
  report_id?: string;
  top_k?: number;
}

export interface ReportInfo {
  doc_id: string;
  title: string;
  source_uri: string;
  n_passages: number;
}

export interface QaApi {
  ask(request: AskRequest): Promise<AskResponse>;
  reports(): Promise<ReportInfo[]>;
  questions(): Promise<string[]>;
}
