/**
 * Per-trial rating state: which stimuli have been auditioned, which sliders
 * have been touched, and when submission becomes legal.
 *
 * Completion contract: submission is blocked until every blinded stimulus
 * (each row with a slider) has been played at least once AND every slider
 * has been touched.  The reference has its own play button and auditioned
 * flag for display, but carries no slider and does not gate submission.
 *
 * Scores are integers in [0, 100]; values are clamped and rounded on entry
 * and round-trip exactly into the POST body.
 */

import type { RatingSubmission } from "./api.js";
import type { StimulusRef, TrialDescriptor } from "./session.js";

export const SCORE_MIN = 0;
export const SCORE_MAX = 100;

/** Round to the nearest integer and clamp into [SCORE_MIN, SCORE_MAX]. */
export function clampScore(value: number): number {
  if (!Number.isFinite(value)) {
    throw new RangeError(`score must be a finite number, got ${value}`);
  }
  return Math.min(SCORE_MAX, Math.max(SCORE_MIN, Math.round(value)));
}

export class TrialState {
  readonly trialId: string;
  readonly referenceStimulus: string;
  readonly stimuli: readonly StimulusRef[];

  private readonly auditionedIds = new Set<string>();
  /** label -> stored integer score; a label is absent until its slider is touched. */
  private readonly ratings = new Map<string, number>();

  constructor(trial: TrialDescriptor) {
    this.trialId = trial.id;
    this.referenceStimulus = trial.reference.stimulus;
    this.stimuli = trial.stimuli.map((s) => ({ ...s }));
  }

  /** True for the reference token and every blinded stimulus token. */
  isKnownStimulus(stimulusId: string): boolean {
    return (
      stimulusId === this.referenceStimulus ||
      this.stimuli.some((s) => s.stimulus === stimulusId)
    );
  }

  /** Record a successful playback start.  Rejects tokens from other trials. */
  markAuditioned(stimulusId: string): void {
    if (!this.isKnownStimulus(stimulusId)) {
      throw new RangeError(
        `stimulus ${stimulusId} is not part of trial ${this.trialId}`,
      );
    }
    this.auditionedIds.add(stimulusId);
  }

  isAuditioned(stimulusId: string): boolean {
    return this.auditionedIds.has(stimulusId);
  }

  /**
   * Store a slider value (clamped, rounded) and return the stored integer.
   * The first call for a label marks its slider as touched.
   */
  setRating(label: string, value: number): number {
    if (!this.stimuli.some((s) => s.label === label)) {
      throw new RangeError(`label ${label} is not part of trial ${this.trialId}`);
    }
    const score = clampScore(value);
    this.ratings.set(label, score);
    return score;
  }

  /** The stored integer score, or null while the slider is untouched. */
  ratingOf(label: string): number | null {
    return this.ratings.get(label) ?? null;
  }

  /** Every blinded stimulus has been played at least once. */
  get allAuditioned(): boolean {
    return this.stimuli.every((s) => this.auditionedIds.has(s.stimulus));
  }

  /** Every slider has been touched. */
  get allRated(): boolean {
    return this.stimuli.every((s) => this.ratings.has(s.label));
  }

  get canSubmit(): boolean {
    return this.allAuditioned && this.allRated;
  }

  /**
   * Build the POST /ratings body.  Scores cover exactly the trial's labels,
   * as the stored integers.  Throws while the completion gate is closed.
   */
  submission(listener: string, timestamp?: string): RatingSubmission {
    if (!this.canSubmit) {
      throw new Error(
        `trial ${this.trialId} is incomplete: every stimulus must be ` +
          "played and every slider touched before submitting",
      );
    }
    const scores: Record<string, number> = {};
    for (const { label } of this.stimuli) {
      const value = this.ratings.get(label);
      if (value === undefined) {
        throw new Error(`missing rating for ${label}`); // unreachable past the gate
      }
      scores[label] = value;
    }
    const body: RatingSubmission = {
      listener,
      trial: this.trialId,
      scores,
    };
    if (timestamp !== undefined) body.timestamp = timestamp;
    return body;
  }
}
