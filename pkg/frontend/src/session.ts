/**
 * Wire types for the listening-test service and strict validation of the
 * session descriptor it serves.
 *
 * The session JSON is fully blinded: stimulus labels are opaque tokens and
 * nothing in the payload names the underlying systems.  Validation rejects
 * any structural problem up front so the page either renders a complete
 * session or a single error screen — never a partial view.
 */

import { z } from "zod";

const stimulusRefSchema = z.object({
  label: z.string().min(1),
  stimulus: z.string().min(1),
});

const trialSchema = z
  .object({
    id: z.string().min(1),
    reference: z.object({ stimulus: z.string().min(1) }),
    stimuli: z.array(stimulusRefSchema).min(1),
  })
  .refine(
    (trial) => new Set(trial.stimuli.map((s) => s.label)).size === trial.stimuli.length,
    { message: "stimulus labels within a trial must be unique" },
  )
  .refine(
    (trial) => new Set(trial.stimuli.map((s) => s.stimulus)).size === trial.stimuli.length,
    { message: "stimulus ids within a trial must be unique" },
  );

export const sessionSchema = z.object({
  session_id: z.string().min(1),
  listener: z.string().min(1),
  trials: z.array(trialSchema).min(1),
});

export type StimulusRef = z.infer<typeof stimulusRefSchema>;
export type TrialDescriptor = z.infer<typeof trialSchema>;
export type SessionDescriptor = z.infer<typeof sessionSchema>;

/** Raised when the session payload is not a well-formed session descriptor. */
export class SessionFormatError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "SessionFormatError";
  }
}

/** Validate a decoded JSON value as a session descriptor or throw. */
export function parseSession(raw: unknown): SessionDescriptor {
  const result = sessionSchema.safeParse(raw);
  if (!result.success) {
    const details = result.error.issues
      .map((issue) => `${issue.path.join(".") || "$"}: ${issue.message}`)
      .join("; ");
    throw new SessionFormatError(`malformed session descriptor — ${details}`);
  }
  return result.data;
}
