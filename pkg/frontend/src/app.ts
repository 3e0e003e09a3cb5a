// Application state and the pure transitions the DOM layer drives. The UI
// never computes a probability: everything displayed is a stored service
// response (or the service's own reported delta) pushed through formatting.

import { formatDelta, formatPercent, oddsText, rawReading } from "./format.js";
import type { RequestSequencer } from "./sequencer.js";
import { appendPoint, type TimelinePoint } from "./timeline.js";
import type { WhatifResponse, WinprobResponse } from "./wire.js";

export interface AppState {
  banner: string | null;
  current: WinprobResponse | null;
  whatif: WhatifResponse | null;
  timeline: TimelinePoint[];
}

export function initialState(): AppState {
  return { banner: null, current: null, whatif: null, timeline: [] };
}

export function applyWinprob(
  state: AppState,
  seq: RequestSequencer,
  token: number,
  timeElapsedS: number,
  resp: WinprobResponse,
): AppState {
  if (!seq.isCurrent(token)) {
    return state;
  }
  return {
    ...state,
    banner: null,
    current: resp,
    timeline: appendPoint(state.timeline, { t: timeElapsedS, p: resp.p_home }),
  };
}

export function applyWhatif(
  state: AppState,
  seq: RequestSequencer,
  token: number,
  resp: WhatifResponse,
): AppState {
  if (!seq.isCurrent(token)) {
    return state;
  }
  return { ...state, banner: null, whatif: resp };
}

/** A failed request clears the value it would have refreshed; a banner with
 *  a stale number next to it would invite misreading. */
export function applyFailure(
  state: AppState,
  seq: RequestSequencer,
  token: number,
  message: string,
): AppState {
  if (!seq.isCurrent(token)) {
    return state;
  }
  return { ...state, banner: message, current: null, whatif: null };
}

export interface ProbabilityLines {
  home: string;
  away: string;
  raw: string;
  odds: string;
  badge: string;
}

export function probabilityLines(resp: WinprobResponse): ProbabilityLines {
  return {
    home: formatPercent(resp.p_home),
    away: formatPercent(1 - resp.p_home),
    raw: rawReading(resp.p_home),
    odds: oddsText(resp.p_home),
    badge: resp.model_type,
  };
}

export interface WhatifRow {
  p: string;
  raw: string;
  delta: string;
}

/** Rows come back in the order variants were entered; the delta column is
 *  the service-reported delta, formatted, not a client-side difference. */
export function whatifRows(resp: WhatifResponse): WhatifRow[] {
  return resp.variants.map((v) => ({
    p: formatPercent(v.p_home),
    raw: rawReading(v.p_home),
    delta: formatDelta(v.delta),
  }));
}
