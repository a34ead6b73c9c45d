import type { AskRequest, AskResponse, QaApi, ReportInfo } from "./types.js";

async function parseOrThrow<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = `HTTP ${response.status}`;
    try {
      const body = (await response.json()) as { error?: string };
      if (body.error) detail = body.error;
    } catch {
      // non-JSON error body; keep the status line
    }
    throw new Error(detail);
  }
  return (await response.json()) as T;
}

export function httpApi(base = ""): QaApi {
  return {
    async ask(request: AskRequest): Promise<AskResponse> {
      const response = await fetch(`${base}/api/ask`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(request),
      });
      return parseOrThrow<AskResponse>(response);
    },

    async reports(): Promise<ReportInfo[]> {
      const response = await fetch(`${base}/api/reports`, { method: "GET" });
      const body = await parseOrThrow<{ reports: ReportInfo[] }>(response);
      return body.reports;
    },

    async questions(): Promise<string[]> {
      const response = await fetch(`${base}/api/questions`, { method: "GET" });
      const body = await parseOrThrow<{ questions: string[] }>(response);
      return body.questions;
    },
  };
}
