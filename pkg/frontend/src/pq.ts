/** Post-run questionnaire form logic.
 *
 * Item sets, Likert bounds, and validation mirror the server exactly (same
 * error strings), so a form that passes here is accepted by `pq_submit`.
 * Scoring stays server-side; the ack brings the factor scores back.
 */

export const LIKERT_MIN = 1;
export const LIKERT_MAX = 7;

export const ITEM_SETS = {
  observation: [4, 7, 8, 10, 14, 15, 16, 18, 20, 22, 30],
  interaction: [1, 2, 3, 6, 9, 19, 21, 23, 24, 31],
} as const;

export type SetName = keyof typeof ITEM_SETS;

export const ITEM_TAGS: Record<number, string> = {
  1: "control responsiveness",
  2: "environment responsiveness",
  3: "interaction naturalness",
  4: "visual involvement",
  6: "locomotion naturalness",
  7: "adjustment speed",
  8: "visual search proficiency",
  9: "task adaptation",
  10: "scene surveyability",
  14: "object manipulation",
  15: "visual display quality",
  16: "depth perception quality",
  18: "movement anticipation",
  19: "control interference",
  20: "experience involvement",
  21: "task focus",
  22: "display distraction",
  23: "control distraction",
  24: "end-of-session awareness",
  30: "event memorability",
  31: "control confidence",
};

export interface PqSubmitMsg {
  type: "pq_submit";
  set: SetName;
  participant: string;
  configuration: string;
  ratings: Record<number, number>;
}

/** Same checks and strings as the server: missing, then unexpected, then
 * out-of-range item ids, each group sorted ascending. Empty means valid. */
export function validateResponse(
  ratings: Record<number, number>,
  set: SetName,
): string[] {
  const expected = new Set<number>(ITEM_SETS[set]);
  const got = new Set<number>(Object.keys(ratings).map(Number));
  const asc = (a: number, b: number) => a - b;
  const errors: string[] = [];
  for (const id of [...expected].filter((i) => !got.has(i)).sort(asc)) {
    errors.push(`missing: ${id}`);
  }
  for (const id of [...got].filter((i) => !expected.has(i)).sort(asc)) {
    errors.push(`unexpected: ${id}`);
  }
  for (const id of [...expected].filter((i) => got.has(i)).sort(asc)) {
    const rating = ratings[id];
    if (
      typeof rating !== "number" ||
      !Number.isInteger(rating) ||
      rating < LIKERT_MIN ||
      rating > LIKERT_MAX
    ) {
      errors.push(`out of range: ${id}`);
    }
  }
  return errors;
}

/** Build the submission message; throws on a response the server would reject. */
export function submission(
  set: SetName,
  participant: string,
  configuration: string,
  ratings: Record<number, number>,
): PqSubmitMsg {
  const errors = validateResponse(ratings, set);
  if (errors.length > 0) {
    throw new Error(`invalid response: ${errors.join("; ")}`);
  }
  return { type: "pq_submit", set, participant, configuration, ratings };
}
