// Display formatting. Every number shown in the page goes through one of
// these; none of them do probability math beyond rounding for display.

/** Headline rendering, one decimal of percent. */
export function formatPercent(p: number): string {
  return (100 * p).toFixed(1) + "%";
}

/** The untouched service value, full precision, for the fine-print line. */
export function rawReading(p: number): string {
  return String(p);
}

/** Long-shot phrasing: 0.021 reads as "≈1 in 48". Empty outside (0, 1)
 *  or when the rounded denominator collapses to 1. */
export function oddsText(p: number): string {
  if (!(p > 0) || !(p < 1)) {
    return "";
  }
  const n = Math.round(1 / p);
  if (n < 2) {
    return "";
  }
  return `≈1 in ${n}`;
}

/** Signed three-decimal delta; an exact wash renders as plain 0.000. */
export function formatDelta(d: number): string {
  const magnitude = Math.abs(d).toFixed(3);
  if (magnitude === "0.000") {
    return "0.000";
  }
  return (d < 0 ? "-" : "+") + magnitude;
}
