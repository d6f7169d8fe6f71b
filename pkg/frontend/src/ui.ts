/**
 * Single-page listening-test UI.
 *
 * Renders the trials of one blinded session in served order: an explicit
 * reference play button plus one row per stimulus (opaque label, play
 * button, auditioned flag, 0-100 slider).  Submission stays disabled until
 * every stimulus has been played at least once and every slider touched;
 * accepted submissions lock the trial, duplicate rejections (409) are
 * surfaced, transport failures leave submission retryable.
 *
 * Blinding: the client only ever receives opaque labels, and this module
 * never logs request or response payloads, so no code path can display or
 * record a system identity.
 *
 * A malformed or unreachable session renders a single error screen — the
 * trial list is built detached and attached only once complete, so a
 * partial session is never shown.
 */

import { MushraApi, ServiceError } from "./api.js";
import type { FetchLike, SubmitResult } from "./api.js";
import { AudioFocus, htmlAudioPlayback } from "./audio.js";
import type { PlaybackFactory } from "./audio.js";
import { SessionFormatError } from "./session.js";
import type { SessionDescriptor, TrialDescriptor } from "./session.js";
import { SCORE_MAX, SCORE_MIN, TrialState } from "./state.js";

export interface AppOptions {
  /** Service origin, e.g. "http://127.0.0.1:8000". */
  baseUrl: string;
  sessionId: string;
  fetchFn: FetchLike;
  playbackFactory?: PlaybackFactory;
  /** Timestamp source for submissions; defaults to the wall clock. */
  clock?: () => string;
}

export type AppHandle =
  | { kind: "error"; message: string }
  | { kind: "session"; session: SessionDescriptor; trials: TrialController[] };

const UNRATED_DISPLAY = "—";

function button(doc: Document, className: string, label: string): HTMLButtonElement {
  const el = doc.createElement("button");
  el.type = "button";
  el.className = className;
  el.textContent = label;
  return el;
}

function flag(doc: Document, stimulusId: string): HTMLElement {
  const el = doc.createElement("span");
  el.className = "auditioned-flag";
  el.dataset["stimulus"] = stimulusId;
  el.dataset["auditioned"] = "false";
  el.textContent = "not yet played";
  return el;
}

/** Wires one trial's DOM to its state and the shared audio focus. */
export class TrialController {
  readonly state: TrialState;
  readonly element: HTMLElement;
  private readonly submitButton: HTMLButtonElement;
  private readonly status: HTMLElement;
  private readonly sliders = new Map<string, HTMLInputElement>();
  private readonly valueReadouts = new Map<string, HTMLElement>();
  private readonly flags = new Map<string, HTMLElement>();
  private locked = false;
  private submitting = false;

  constructor(
    doc: Document,
    trial: TrialDescriptor,
    private readonly listener: string,
    private readonly api: MushraApi,
    private readonly focus: AudioFocus,
    private readonly clock: () => string,
    index: number,
  ) {
    this.state = new TrialState(trial);

    const section = doc.createElement("section");
    section.className = "trial";
    section.dataset["trial"] = trial.id;

    const heading = doc.createElement("h2");
    heading.textContent = `Trial ${index + 1}`;
    section.appendChild(heading);

    const referenceRow = doc.createElement("div");
    referenceRow.className = "reference-row";
    const referenceButton = button(doc, "play-reference", "Play reference");
    referenceButton.addEventListener("click", () => {
      void this.play(trial.reference.stimulus);
    });
    referenceRow.appendChild(referenceButton);
    const referenceFlag = flag(doc, trial.reference.stimulus);
    this.flags.set(trial.reference.stimulus, referenceFlag);
    referenceRow.appendChild(referenceFlag);
    section.appendChild(referenceRow);

    for (const stimulus of trial.stimuli) {
      const row = doc.createElement("div");
      row.className = "stimulus-row";
      row.dataset["stimulus"] = stimulus.stimulus;

      const label = doc.createElement("span");
      label.className = "stimulus-label";
      label.textContent = stimulus.label;
      row.appendChild(label);

      const playButton = button(doc, "play-stimulus", "Play");
      playButton.addEventListener("click", () => {
        void this.play(stimulus.stimulus);
      });
      row.appendChild(playButton);

      const auditionedFlag = flag(doc, stimulus.stimulus);
      this.flags.set(stimulus.stimulus, auditionedFlag);
      row.appendChild(auditionedFlag);

      const slider = doc.createElement("input");
      slider.type = "range";
      slider.className = "rating-slider";
      slider.min = String(SCORE_MIN);
      slider.max = String(SCORE_MAX);
      slider.step = "1";
      slider.value = "50";
      slider.setAttribute("aria-label", `rating for ${stimulus.label}`);
      slider.addEventListener("input", () => {
        this.rate(stimulus.label, Number(slider.value));
      });
      this.sliders.set(stimulus.label, slider);
      row.appendChild(slider);

      const readout = doc.createElement("span");
      readout.className = "rating-value";
      readout.textContent = UNRATED_DISPLAY;
      this.valueReadouts.set(stimulus.label, readout);
      row.appendChild(readout);

      section.appendChild(row);
    }

    this.submitButton = button(doc, "submit-ratings", "Submit ratings");
    this.submitButton.addEventListener("click", () => {
      void this.submit();
    });
    section.appendChild(this.submitButton);

    this.status = doc.createElement("p");
    this.status.className = "trial-status";
    this.status.setAttribute("role", "status");
    section.appendChild(this.status);

    this.element = section;
    this.refresh();
  }

  get trialId(): string {
    return this.state.trialId;
  }

  /**
   * Play one stimulus (reference or blinded token).  A successful start
   * marks it auditioned; a failure leaves the flag unset and tells the user
   * to try again — the play button itself is the retry affordance.
   */
  async play(stimulusId: string): Promise<void> {
    try {
      const started = await this.focus.play(this.api.audioUrl(stimulusId));
      if (started) {
        this.state.markAuditioned(stimulusId);
        this.setStatus("", "info");
      }
    } catch {
      this.setStatus("Playback failed — press play to try again.", "error");
    }
    this.refresh();
  }

  /** Store one slider value (clamped to an integer in [0, 100]). */
  rate(label: string, value: number): void {
    if (this.locked) return;
    const stored = this.state.setRating(label, value);
    const slider = this.sliders.get(label);
    if (slider) slider.value = String(stored);
    const readout = this.valueReadouts.get(label);
    if (readout) readout.textContent = String(stored);
    this.refresh();
  }

  /**
   * Submit the trial's ratings.  Returns the service's verdict, or null when
   * the gate is still closed or a submission is already in flight / done.
   */
  async submit(): Promise<SubmitResult | null> {
    if (this.locked || this.submitting || !this.state.canSubmit) return null;
    this.submitting = true;
    this.refresh();
    let result: SubmitResult;
    try {
      result = await this.api.submitRatings(
        this.state.submission(this.listener, this.clock()),
      );
    } catch (cause) {
      this.submitting = false;
      this.setStatus(
        `Submission failed (${String(cause)}) — please try again.`,
        "error",
      );
      this.refresh();
      return null;
    }
    this.submitting = false;
    if (result.accepted) {
      this.locked = true;
      this.setStatus("Ratings accepted — thank you.", "success");
    } else if (result.status === 409) {
      // The service already holds a record for this trial; it can never
      // accept another, so lock the trial rather than invite retries.
      this.locked = true;
      this.setStatus(`Already submitted: ${result.message}`, "error");
    } else {
      this.setStatus(`Submission rejected: ${result.message}`, "error");
    }
    this.refresh();
    return result;
  }

  /** Sync button/flag/slider enablement with the state. */
  refresh(): void {
    for (const [stimulusId, el] of this.flags) {
      const auditioned = this.state.isAuditioned(stimulusId);
      el.dataset["auditioned"] = auditioned ? "true" : "false";
      el.textContent = auditioned ? "played" : "not yet played";
    }
    for (const slider of this.sliders.values()) {
      slider.disabled = this.locked;
    }
    this.submitButton.disabled =
      this.locked || this.submitting || !this.state.canSubmit;
  }

  private setStatus(text: string, kind: "info" | "error" | "success"): void {
    this.status.textContent = text;
    this.status.dataset["kind"] = kind;
  }
}

function errorScreen(doc: Document, message: string): HTMLElement {
  const el = doc.createElement("div");
  el.className = "error-screen";
  el.setAttribute("role", "alert");
  const heading = doc.createElement("h1");
  heading.textContent = "Could not load the listening session";
  const detail = doc.createElement("p");
  detail.textContent = message;
  el.append(heading, detail);
  return el;
}

/**
 * Fetch the session and render the whole test into `root`.
 *
 * On any fetch/validation failure the root shows only an error screen; on
 * success it shows the complete session, built detached and attached in one
 * step so a partial render is impossible.
 */
export async function renderApp(
  root: HTMLElement,
  options: AppOptions,
): Promise<AppHandle> {
  const doc = root.ownerDocument;
  const loading = doc.createElement("p");
  loading.className = "loading";
  loading.textContent = "Loading session…";
  root.replaceChildren(loading);

  const api = new MushraApi(options.baseUrl, options.fetchFn);
  let session: SessionDescriptor;
  try {
    session = await api.fetchSession(options.sessionId);
  } catch (cause) {
    const message =
      cause instanceof SessionFormatError || cause instanceof ServiceError
        ? cause.message
        : `unexpected failure: ${String(cause)}`;
    root.replaceChildren(errorScreen(doc, message));
    return { kind: "error", message };
  }

  const focus = new AudioFocus(options.playbackFactory ?? htmlAudioPlayback);
  const clock = options.clock ?? (() => new Date().toISOString());

  const app = doc.createElement("div");
  app.className = "mushra-app";
  const heading = doc.createElement("h1");
  heading.textContent = "Listening test";
  app.appendChild(heading);
  const meta = doc.createElement("p");
  meta.className = "session-meta";
  meta.textContent = `Session ${session.session_id} — rate each stimulus from 0 to 100 after listening to all of them.`;
  app.appendChild(meta);

  const trials = session.trials.map((trial, index) => {
    const controller = new TrialController(
      doc,
      trial,
      session.listener,
      api,
      focus,
      clock,
      index,
    );
    app.appendChild(controller.element);
    return controller;
  });

  root.replaceChildren(app);
  return { kind: "session", session, trials };
}
