import { describe, expect, it } from "vitest";

import { splitHighlight } from "../src/highlight.js";

describe("splitHighlight", () => {
  it("splits strictly by offsets", () => {
    const segments = splitHighlight("abc answer xyz", [4, 10]);
    expect(segments).toEqual({ before: "abc ", marked: "answer", after: " xyz" });
  });

  it("uses offsets even when the text occurs twice", () => {
    const passage = "margin is fine but margin is tight";
    const segments = splitHighlight(passage, [19, 25]);
    expect(segments.marked).toBe("margin");
    expect(segments.before).toBe("margin is fine but ");
  });

  it("handles spans at the edges", () => {
    expect(splitHighlight("answer", [0, 6])).toEqual({
      before: "",
      marked: "answer",
      after: "",
    });
  });

  it("rejects out-of-range offsets", () => {
    expect(() => splitHighlight("short", [0, 99])).toThrow();
    expect(() => splitHighlight("short", [-1, 2])).toThrow();
    expect(() => splitHighlight("short", [4, 2])).toThrow();
  });
});
