// Form model and its mapping onto the wire format. The form speaks the
// language of a scoreboard (quarter + clock + two scores); the service
// wants elapsed seconds and a score difference, so the conversion lives
// here and nowhere else.

import { validateGameState } from "./schema.js";
import type { WireGameState, Possession } from "./wire.js";

export const QUARTER_S = 900;

export interface FormModel {
  quarter: string;
  clock: string;
  homeScore: string;
  awayScore: string;
  possession: string;
  noDown: boolean;
  down: string;
  yardsToGo: string;
  fieldPosition: string;
  homeTimeouts: string;
  awayTimeouts: string;
  homePossessionTime: string;
  ratingDiff: string;
}

export function defaultForm(): FormModel {
  return {
    quarter: "1",
    clock: "900",
    homeScore: "0",
    awayScore: "0",
    possession: "N",
    noDown: true,
    down: "1",
    yardsToGo: "10",
    fieldPosition: "35",
    homeTimeouts: "3",
    awayTimeouts: "3",
    homePossessionTime: "0",
    ratingDiff: "0",
  };
}

/** The down selector is inert while "no down" is chosen; the pairing rule
 *  (down 0 <-> yards to go 0) is applied during conversion. */
export function downDisabled(form: FormModel): boolean {
  return form.noDown;
}

export interface ParseResult {
  state?: WireGameState;
  errors: Record<string, string>;
}

function parseIntField(raw: string, lo: number, hi: number): number | string {
  if (!/^-?\d+$/.test(raw.trim())) {
    return "must be a whole number";
  }
  const v = Number(raw.trim());
  if (v < lo || v > hi) {
    return `must be between ${lo} and ${hi}`;
  }
  return v;
}

export function parseForm(form: FormModel, schemaDoc: unknown): ParseResult {
  const errors: Record<string, string> = {};
  const take = (field: keyof FormModel, lo: number, hi: number): number => {
    const got = parseIntField(form[field] as string, lo, hi);
    if (typeof got === "string") {
      errors[field] = got;
      return NaN;
    }
    return got;
  };

  const quarter = take("quarter", 1, 4);
  const clock = take("clock", 0, QUARTER_S);
  const homeScore = take("homeScore", 0, 200);
  const awayScore = take("awayScore", 0, 200);
  const fieldPosition = take("fieldPosition", 0, 100);
  const homeTimeouts = take("homeTimeouts", 0, 3);
  const awayTimeouts = take("awayTimeouts", 0, 3);
  const homePossessionTime = take("homePossessionTime", 0, 14400);

  let down = 0;
  let yardsToGo = 0;
  if (!form.noDown) {
    down = take("down", 1, 4);
    yardsToGo = take("yardsToGo", 1, 99);
  }

  if (form.possession !== "H" && form.possession !== "A" && form.possession !== "N") {
    errors.possession = "must be H, A or N";
  }
  const ratingDiff = Number(form.ratingDiff.trim());
  if (form.ratingDiff.trim() === "" || !Number.isFinite(ratingDiff)) {
    errors.ratingDiff = "must be a number";
  }

  if (Object.keys(errors).length > 0) {
    return { errors };
  }

  const state: WireGameState = {
    schema_version: 1,
    time_elapsed_s: (quarter - 1) * QUARTER_S + (QUARTER_S - clock),
    score_diff: homeScore - awayScore,
    possession: form.possession as Possession,
    down,
    yards_to_go: yardsToGo,
    field_position: fieldPosition,
    home_timeouts: homeTimeouts,
    away_timeouts: awayTimeouts,
    home_possession_time_s: homePossessionTime,
    rating_diff: ratingDiff,
  };

  // Last word goes to the shared schema, so client acceptance can never
  // drift from what the service enforces.
  for (const issue of validateGameState(state, schemaDoc)) {
    if (!(issue.path in errors)) {
      errors[issue.path] = issue.message;
    }
  }
  if (Object.keys(errors).length > 0) {
    return { errors };
  }
  return { state, errors };
}

const QUERY_KEYS: Record<keyof FormModel, string> = {
  quarter: "q",
  clock: "clock",
  homeScore: "hs",
  awayScore: "as",
  possession: "poss",
  noDown: "nodown",
  down: "down",
  yardsToGo: "ytg",
  fieldPosition: "fp",
  homeTimeouts: "hto",
  awayTimeouts: "ato",
  homePossessionTime: "hpt",
  ratingDiff: "rd",
};

/** Encode the form into query parameters so a state can be shared by URL. */
export function formToQuery(form: FormModel): string {
  const params = new URLSearchParams();
  for (const [field, key] of Object.entries(QUERY_KEYS) as [keyof FormModel, string][]) {
    const value = form[field];
    params.set(key, typeof value === "boolean" ? (value ? "1" : "0") : value);
  }
  return params.toString();
}

/** Inverse of formToQuery; absent keys fall back to the default form. */
export function queryToForm(query: string): FormModel {
  const params = new URLSearchParams(query);
  const form = defaultForm();
  for (const [field, key] of Object.entries(QUERY_KEYS) as [keyof FormModel, string][]) {
    const raw = params.get(key);
    if (raw === null) {
      continue;
    }
    if (field === "noDown") {
      form.noDown = raw === "1";
    } else {
      (form as unknown as Record<string, string>)[field] = raw;
    }
  }
  return form;
}
