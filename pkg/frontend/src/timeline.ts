// Session timeline: (elapsed seconds, p_home) points rendered as an inline
// SVG string. Pure string construction so it tests without a DOM.

export interface TimelinePoint {
  t: number;
  p: number;
}

/** Insert keeping time order; an equal timestamp lands after existing
 *  points so repeated queries at one moment display in entry order. */
export function appendPoint(points: readonly TimelinePoint[], pt: TimelinePoint): TimelinePoint[] {
  const out = points.slice();
  let k = out.length;
  while (k > 0 && out[k - 1]!.t > pt.t) {
    k -= 1;
  }
  out.splice(k, 0, pt);
  return out;
}

const MARGIN = { left: 42, right: 12, top: 12, bottom: 24 };

export function timelineSvg(points: readonly TimelinePoint[], width = 640, height = 240): string {
  const innerW = width - MARGIN.left - MARGIN.right;
  const innerH = height - MARGIN.top - MARGIN.bottom;
  const body: string[] = [];

  const tMax = Math.max(3600, ...points.map((p) => p.t));
  const x = (t: number) => MARGIN.left + (t / tMax) * innerW;
  const y = (p: number) => MARGIN.top + (1 - p) * innerH;

  body.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${innerW}" height="${innerH}" class="frame"/>`,
    `<line x1="${MARGIN.left}" y1="${y(0.5)}" x2="${MARGIN.left + innerW}" y2="${y(0.5)}" class="midline"/>`,
    `<text x="${MARGIN.left - 6}" y="${y(1)}" class="axis">1.0</text>`,
    `<text x="${MARGIN.left - 6}" y="${y(0.5)}" class="axis">0.5</text>`,
    `<text x="${MARGIN.left - 6}" y="${y(0)}" class="axis">0.0</text>`,
  );

  if (points.length === 0) {
    body.push(`<text x="${width / 2}" y="${height / 2}" class="empty">no queries yet</text>`);
  } else {
    if (points.length > 1) {
      const path = points.map((p) => `${x(p.t).toFixed(1)},${y(p.p).toFixed(1)}`).join(" ");
      body.push(`<polyline points="${path}" class="trace"/>`);
    }
    let minIdx = 0;
    for (let i = 1; i < points.length; i++) {
      if (points[i]!.p < points[minIdx]!.p) {
        minIdx = i;
      }
    }
    points.forEach((p, i) => {
      if (i !== minIdx) {
        body.push(`<circle cx="${x(p.t).toFixed(1)}" cy="${y(p.p).toFixed(1)}" r="3" class="pt"/>`);
      }
    });
    const m = points[minIdx]!;
    body.push(
      `<circle cx="${x(m.t).toFixed(1)}" cy="${y(m.p).toFixed(1)}" r="5" class="min-marker"/>`,
      `<text x="${x(m.t).toFixed(1)}" y="${(y(m.p) - 9).toFixed(1)}" class="min-label">${m.p.toFixed(3)}</text>`,
    );
  }

  return (
    `<svg viewBox="0 0 ${width} ${height}" width="${width}" height="${height}" ` +
    `xmlns="http://www.w3.org/2000/svg" role="img">` +
    body.join("") +
    `</svg>`
  );
}
