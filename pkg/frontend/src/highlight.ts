// Split a passage around the answer using the server-provided character
// offsets. Never search for the answer text client-side: offsets are the
// contract, and the same string can occur more than once in a passage.

export interface HighlightSegments {
  before: string;
  marked: string;
  after: string;
}

export function splitHighlight(
  passageText: string,
  highlight: [number, number],
): HighlightSegments {
  const [start, end] = highlight;
  if (!(0 <= start && start <= end && end <= passageText.length)) {
    throw new Error(`highlight [${start}, ${end}) out of range`);
  }
  return {
    before: passageText.slice(0, start),
    marked: passageText.slice(start, end),
    after: passageText.slice(end),
  };
}
