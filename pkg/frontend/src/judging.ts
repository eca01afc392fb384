// Pairwise judging flow. The machine owns all view state and never touches
// the DOM; the page re-renders from `state` on every onChange call.
//
// Codes are relative to presentation: the left card is always the payload's
// `first` idea, so Left maps to "A" and Right to "B". Which underlying idea
// that is stays unknown here; the server resolves it from its own order.

import { ApiError, Client, JudgmentCode, PairPayload, messageOf } from "./api.js";

export type Side = "Left" | "Tie" | "Right";

export const SIDES: readonly Side[] = ["Left", "Tie", "Right"];

export const SIDE_TO_CODE: Record<Side, JudgmentCode> = {
  Left: "A",
  Tie: "Tie",
  Right: "B",
};

// Condensed reference text shown under each criterion selector.
export const CRITERIA_HINTS: Record<string, string> = {
  Significance:
    "Impact on the field, relevance to pressing real-world problems, advancement of theoretical or practical understanding.",
  Novelty:
    "Originality of the question, innovation in approach or data, contribution to gaps in the literature.",
  Feasibility:
    "Availability of data and resources, a realistic timeline, sound and practical methodology.",
  "Expected Effectiveness":
    "Theoretical rigor and how likely the hypotheses are to find clear empirical support.",
  Overall: "Weigh the other criteria together and judge each idea as a whole.",
};

export type JudgingPhase = "idle" | "loading" | "judging" | "submitting" | "done" | "offline";

export interface JudgingState {
  phase: JudgingPhase;
  pair: PairPayload | null;
  selections: Partial<Record<string, Side>>;
  judged: number;
  toast: string | null;
}

export class JudgingMachine {
  state: JudgingState = { phase: "idle", pair: null, selections: {}, judged: 0, toast: null };

  constructor(
    private readonly client: Client,
    readonly annotator: string,
    private readonly onChange: (state: JudgingState) => void = () => {},
  ) {}

  private emit(): void {
    this.onChange(this.state);
  }

  async start(): Promise<void> {
    await this.loadNext();
  }

  private async loadNext(): Promise<void> {
    this.state = { ...this.state, phase: "loading", pair: null, selections: {}, toast: null };
    this.emit();
    try {
      const pair = await this.client.nextPair(this.annotator);
      if (pair === null) {
        this.state = { ...this.state, phase: "done" };
      } else {
        this.state = { ...this.state, phase: "judging", pair, selections: {} };
      }
    } catch (err) {
      // transport died; leave the queue alone and offer a retry
      this.state = { ...this.state, phase: "offline", toast: messageOf(err) };
    }
    this.emit();
  }

  select(criterion: string, side: Side): void {
    const pair = this.state.pair;
    if (this.state.phase !== "judging" || pair === null) return;
    if (!pair.criteria.includes(criterion) || !SIDES.includes(side)) return;
    this.state = {
      ...this.state,
      selections: { ...this.state.selections, [criterion]: side },
    };
    this.emit();
  }

  /** True once every criterion served with the pair has a side picked. */
  canSubmit(): boolean {
    const pair = this.state.pair;
    return (
      this.state.phase === "judging" &&
      pair !== null &&
      pair.criteria.every((c) => this.state.selections[c] !== undefined)
    );
  }

  async submit(): Promise<void> {
    if (!this.canSubmit()) return;
    const pair = this.state.pair!;
    const values: Record<string, JudgmentCode> = {};
    for (const criterion of pair.criteria) {
      values[criterion] = SIDE_TO_CODE[this.state.selections[criterion]!];
    }
    this.state = { ...this.state, phase: "submitting", toast: null };
    this.emit();
    try {
      await this.client.submitJudgment({
        pair_id: pair.pair_id,
        annotator: this.annotator,
        values,
      });
      this.state = { ...this.state, judged: this.state.judged + 1 };
      await this.loadNext();
    } catch (err) {
      if (err instanceof ApiError) {
        // covers the 409 duplicate: stay on this pair and surface the detail
        this.state = { ...this.state, phase: "judging", toast: messageOf(err) };
      } else {
        this.state = { ...this.state, phase: "offline", toast: messageOf(err) };
      }
      this.emit();
    }
  }

  /** Resume whichever step a network failure interrupted, selections intact. */
  async retry(): Promise<void> {
    if (this.state.phase !== "offline") return;
    if (this.state.pair === null) {
      await this.loadNext();
    } else {
      this.state = { ...this.state, phase: "judging", toast: null };
      this.emit();
      await this.submit();
    }
  }
}
