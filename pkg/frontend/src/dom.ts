// Browser entry point: binds the form to the pure core. This is the only
// module that touches the DOM, and it holds no logic beyond wiring; the
// testable behavior all lives in form/app/timeline/client.

import {
  applyFailure,
  applyWhatif,
  applyWinprob,
  initialState,
  probabilityLines,
  whatifRows,
  type AppState,
} from "./app.js";
import { ServiceClient, ServiceError } from "./client.js";
import { defaultForm, downDisabled, formToQuery, parseForm, queryToForm, type FormModel } from "./form.js";
import { RequestSequencer } from "./sequencer.js";
import { timelineSvg } from "./timeline.js";
import type { WireGameState } from "./wire.js";

const FIELDS: [keyof FormModel, string, string][] = [
  ["quarter", "quarter", "select:1,2,3,4"],
  ["clock", "clock (s left in quarter)", "text"],
  ["homeScore", "home score", "text"],
  ["awayScore", "away score", "text"],
  ["possession", "possession", "select:H,A,N"],
  ["noDown", "no-down play", "checkbox"],
  ["down", "down", "select:1,2,3,4"],
  ["yardsToGo", "yards to go", "text"],
  ["fieldPosition", "field position", "text"],
  ["homeTimeouts", "home timeouts", "select:0,1,2,3"],
  ["awayTimeouts", "away timeouts", "select:0,1,2,3"],
  ["homePossessionTime", "home possession time (s)", "text"],
  ["ratingDiff", "rating difference", "text"],
];

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) {
    throw new Error("missing #app container");
  }
  const query = new URLSearchParams(window.location.search);
  const baseUrl = query.get("service") ?? window.location.origin;
  const schemaUrl = query.get("schema") ?? "../schemas/game_state.schema.json";
  const schemaDoc: unknown = await (await fetch(schemaUrl)).json();

  const client = new ServiceClient(baseUrl);
  const seq = new RequestSequencer();
  let state: AppState = initialState();
  let form: FormModel = window.location.search ? queryToForm(window.location.search) : defaultForm();
  let variants: WireGameState[] = [];
  let pending = false;

  root.innerHTML = `
    <h1>win probability what-if</h1>
    <p id="badge" class="badge"></p>
    <div id="banner" class="banner" hidden></div>
    <form id="state-form"></form>
    <div class="actions">
      <button type="button" id="ask">win probability</button>
      <button type="button" id="add-variant">add as variant</button>
      <button type="button" id="compare" disabled>compare variants</button>
      <button type="button" id="clear-variants" disabled>clear variants</button>
    </div>
    <section id="reading"></section>
    <section id="variants"></section>
    <section id="chart"></section>
  `;

  const formEl = root.querySelector("#state-form") as HTMLFormElement;
  buildForm(formEl, form);
  formEl.addEventListener("input", () => {
    form = readForm(formEl, form);
    syncDownControls(formEl, form);
  });

  const banner = root.querySelector("#banner") as HTMLElement;
  const reading = root.querySelector("#reading") as HTMLElement;
  const variantsEl = root.querySelector("#variants") as HTMLElement;
  const chart = root.querySelector("#chart") as HTMLElement;
  const badge = root.querySelector("#badge") as HTMLElement;
  const askBtn = root.querySelector("#ask") as HTMLButtonElement;
  const addBtn = root.querySelector("#add-variant") as HTMLButtonElement;
  const compareBtn = root.querySelector("#compare") as HTMLButtonElement;
  const clearBtn = root.querySelector("#clear-variants") as HTMLButtonElement;

  function render(): void {
    banner.hidden = state.banner === null;
    banner.textContent = state.banner ?? "";
    if (state.current) {
      const lines = probabilityLines(state.current);
      reading.innerHTML =
        `<p class="headline">home ${lines.home} / away ${lines.away}` +
        (lines.odds && state.current.p_home < 0.15 ? ` <em>(${lines.odds})</em>` : "") +
        `</p><p class="fine">p_home = <span id="raw-p">${lines.raw}</span></p>`;
      badge.textContent = `model: ${lines.badge}`;
    } else {
      reading.innerHTML = "";
    }
    if (state.whatif) {
      const rows = whatifRows(state.whatif)
        .map((r, i) => `<tr><td>variant ${i + 1}</td><td>${r.p}</td><td>${r.delta}</td></tr>`)
        .join("");
      variantsEl.innerHTML =
        `<table><thead><tr><th></th><th>p_home</th><th>delta</th></tr></thead>` +
        `<tbody>${rows}</tbody></table>`;
    } else {
      variantsEl.innerHTML = variants.length ? `<p>${variants.length} variant(s) staged</p>` : "";
    }
    chart.innerHTML = timelineSvg(state.timeline);
    compareBtn.disabled = variants.length === 0 || pending;
    clearBtn.disabled = variants.length === 0;
    askBtn.disabled = pending;
    addBtn.disabled = pending;
  }

  function currentState(): WireGameState | null {
    const parsed = parseForm(form, schemaDoc);
    showFieldErrors(formEl, parsed.errors);
    return parsed.state ?? null;
  }

  askBtn.addEventListener("click", async () => {
    const wire = currentState();
    if (!wire || pending) {
      return;
    }
    history.replaceState(null, "", "?" + formToQuery(form));
    const token = seq.begin();
    pending = true;
    render();
    try {
      const resp = await client.winprob(wire);
      state = applyWinprob(state, seq, token, wire.time_elapsed_s, resp);
    } catch (exc) {
      state = applyFailure(state, seq, token, describe(exc));
    } finally {
      pending = false;
      render();
    }
  });

  addBtn.addEventListener("click", () => {
    const wire = currentState();
    if (wire) {
      variants.push(wire);
      render();
    }
  });

  clearBtn.addEventListener("click", () => {
    variants = [];
    state = { ...state, whatif: null };
    render();
  });

  compareBtn.addEventListener("click", async () => {
    const wire = currentState();
    if (!wire || pending || variants.length === 0) {
      return;
    }
    const token = seq.begin();
    pending = true;
    render();
    try {
      const resp = await client.whatif(wire, variants);
      state = applyWhatif(state, seq, token, resp);
    } catch (exc) {
      state = applyFailure(state, seq, token, describe(exc));
    } finally {
      pending = false;
      render();
    }
  });

  try {
    const health = await client.health();
    badge.textContent = `model: ${health.model_type}`;
  } catch (exc) {
    state = { ...state, banner: describe(exc) };
  }
  syncDownControls(formEl, form);
  render();
}

function describe(exc: unknown): string {
  return exc instanceof ServiceError ? exc.message : String(exc);
}

function buildForm(formEl: HTMLFormElement, form: FormModel): void {
  for (const [field, label, kind] of FIELDS) {
    const row = document.createElement("label");
    row.className = "row";
    row.append(`${label} `);
    let input: HTMLElement;
    if (kind.startsWith("select:")) {
      const sel = document.createElement("select");
      for (const opt of kind.slice(7).split(",")) {
        const o = document.createElement("option");
        o.value = opt;
        o.textContent = opt;
        sel.append(o);
      }
      sel.value = form[field] as string;
      input = sel;
    } else if (kind === "checkbox") {
      const box = document.createElement("input");
      box.type = "checkbox";
      box.checked = form[field] as boolean;
      input = box;
    } else {
      const text = document.createElement("input");
      text.type = "text";
      text.value = form[field] as string;
      input = text;
    }
    input.setAttribute("name", field);
    row.append(input);
    const msg = document.createElement("span");
    msg.className = "field-error";
    msg.dataset.for = field;
    row.append(msg);
    formEl.append(row);
  }
}

function readForm(formEl: HTMLFormElement, prev: FormModel): FormModel {
  const next = { ...prev };
  for (const [field] of FIELDS) {
    const el = formEl.querySelector(`[name="${field}"]`) as HTMLInputElement | HTMLSelectElement;
    if (field === "noDown") {
      next.noDown = (el as HTMLInputElement).checked;
    } else {
      (next as unknown as Record<string, string>)[field] = el.value;
    }
  }
  return next;
}

function syncDownControls(formEl: HTMLFormElement, form: FormModel): void {
  const disabled = downDisabled(form);
  for (const name of ["down", "yardsToGo"]) {
    const el = formEl.querySelector(`[name="${name}"]`) as HTMLInputElement | HTMLSelectElement;
    el.disabled = disabled;
  }
}

function showFieldErrors(formEl: HTMLFormElement, errors: Record<string, string>): void {
  for (const span of formEl.querySelectorAll<HTMLElement>(".field-error")) {
    const field = span.dataset.for ?? "";
    span.textContent = errors[field] ?? "";
  }
}

void boot();
