/**
 * Word cloud sizing: font size scales linearly with the term's TF-IDF score
 * (not raw counts), so locally unusual terms dominate the cell's cloud.
 */
import { Annotations } from "./types.js";

export interface CloudWord {
  term: string;
  score: number;
  fontPx: number;
}

export function cloudWords(
  annotations: Annotations,
  minPx = 11,
  maxPx = 42,
): CloudWord[] {
  if (annotations.length === 0) return [];
  const top = Math.max(...annotations.map((a) => a.score));
  return annotations.map(({ term, score }) => ({
    term,
    score,
    fontPx: top > 0 ? minPx + (maxPx - minPx) * (score / top) : minPx,
  }));
}
