/**
 * Locate the citation marker for the target reference inside the context
 * text so it can be highlighted. Markers are either numeric brackets
 * ("[2]", "[1,3]") or author-year parentheticals ("(Mori, 2017)"); when
 * several candidates exist, the one sharing the most tokens (surname, year)
 * with the target reference wins, earliest first on ties.
 */

export interface Span {
  start: number;
  end: number;
}

const MARKER_PATTERN = /\[[0-9,\s–-]+\]|\([^()]*\b(1[6-9]|20)\d{2}[a-z]?\b[^()]*\)/g;

function tokens(value: string): Set<string> {
  return new Set(
    value
      .toLowerCase()
      .split(/[^a-z0-9]+/)
      .filter((t) => t.length >= 2),
  );
}

export function findTargetSpan(text: string, target: string): Span | null {
  const targetTokens = tokens(target);
  let best: Span | null = null;
  let bestScore = -1;
  for (const match of text.matchAll(MARKER_PATTERN)) {
    const span = { start: match.index ?? 0, end: (match.index ?? 0) + match[0].length };
    let score = 0;
    for (const token of tokens(match[0])) {
      if (targetTokens.has(token)) score += 1;
    }
    if (score > bestScore) {
      best = span;
      bestScore = score;
    }
  }
  return best;
}

/** Split text into [before, marker, after]; marker is '' when unlocated. */
export function splitAroundTarget(text: string, target: string): [string, string, string] {
  const span = findTargetSpan(text, target);
  if (span === null) {
    return [text, '', ''];
  }
  return [text.slice(0, span.start), text.slice(span.start, span.end), text.slice(span.end)];
}
