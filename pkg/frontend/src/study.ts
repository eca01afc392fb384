// Timed study flow: pick two of four offered topics, draft one idea per
// topic against a server deadline, read the reference panel on whichever
// topic the server designates, close with the three-question feedback form.
//
// The countdown here is advisory. Deadlines arrive as absolute timestamps
// and the server re-checks them on submission, so a page reload (or a skewed
// clock) never resets anyone's window; rehydrate() rebuilds the view from
// the stored session document and any stale submit reconciles through a 409.

import {
  ApiError,
  Client,
  FeedbackKey,
  FeedbackValue,
  SessionPayload,
  messageOf,
} from "./api.js";

export interface TopicOption {
  id: string;
  title: string;
}

export const TOPICS_TO_CHOOSE = 2;

export const FEEDBACK_KEYS: readonly FeedbackKey[] = [
  "reference_ideas",
  "data_segments",
  "validation_processes",
];
export const FEEDBACK_VALUES: readonly FeedbackValue[] = [
  "VeryHelpful",
  "SomewhatHelpful",
  "NotHelpful",
];
export const FEEDBACK_QUESTIONS: Record<FeedbackKey, string> = {
  reference_ideas: "How helpful were the reference ideas?",
  data_segments: "How helpful were the dataset snippets?",
  validation_processes: "How helpful were the validation traces?",
};

export type StudyPhase = "choosing" | "opening" | "working" | "feedback" | "done";

export interface TopicProgress {
  topic_id: string;
  deadline: string;
  draft: string;
  submitted: boolean;
  late: boolean | null;
}

export interface StudyState {
  phase: StudyPhase;
  offered: TopicOption[];
  picked: string[];
  session: SessionPayload | null;
  progress: TopicProgress[];
  current: number;
  traceMode: "raw" | "summary";
  openSnippets: Record<string, boolean>;
  feedback: Partial<Record<FeedbackKey, FeedbackValue>>;
  toast: string | null;
}

export interface StudyOptions {
  participant: string;
  offered: TopicOption[];
  onChange?: (state: StudyState) => void;
  clock?: () => number;
  persist?: (session: SessionPayload) => void;
}

export function formatClock(ms: number): string {
  const total = Math.max(0, Math.floor(ms / 1000));
  const minutes = Math.floor(total / 60);
  const seconds = total % 60;
  return `${minutes}:${String(seconds).padStart(2, "0")}`;
}

export class StudyMachine {
  state: StudyState;
  readonly participant: string;
  private readonly onChange: (state: StudyState) => void;
  private readonly clock: () => number;
  private readonly persist: (session: SessionPayload) => void;

  constructor(
    private readonly client: Client,
    options: StudyOptions,
  ) {
    this.participant = options.participant;
    this.onChange = options.onChange ?? (() => {});
    this.clock = options.clock ?? Date.now;
    this.persist = options.persist ?? (() => {});
    this.state = {
      phase: "choosing",
      offered: options.offered,
      picked: [],
      session: null,
      progress: [],
      current: 0,
      traceMode: "summary",
      openSnippets: {},
      feedback: {},
      toast: null,
    };
  }

  private emit(): void {
    this.onChange(this.state);
  }

  // -- topic choice --------------------------------------------------------

  togglePick(topicId: string): void {
    if (this.state.phase !== "choosing") return;
    if (!this.state.offered.some((t) => t.id === topicId)) return;
    let picked: string[];
    if (this.state.picked.includes(topicId)) {
      picked = this.state.picked.filter((t) => t !== topicId);
    } else if (this.state.picked.length < TOPICS_TO_CHOOSE) {
      picked = [...this.state.picked, topicId];
    } else {
      // already at two; drop one before adding another
      picked = this.state.picked;
    }
    this.state = { ...this.state, picked };
    this.emit();
  }

  canBegin(): boolean {
    return this.state.phase === "choosing" && this.state.picked.length === TOPICS_TO_CHOOSE;
  }

  async begin(): Promise<void> {
    if (!this.canBegin()) return;
    this.state = { ...this.state, phase: "opening", toast: null };
    this.emit();
    try {
      const session = await this.client.openSession(this.participant, this.state.picked);
      this.persist(session);
      this.adopt(session);
    } catch (err) {
      this.state = { ...this.state, phase: "choosing", toast: messageOf(err) };
      this.emit();
    }
  }

  /** Rebuild the view of an already-open session, e.g. after a page reload. */
  rehydrate(session: SessionPayload): void {
    this.adopt(session);
  }

  private adopt(session: SessionPayload): void {
    const progress: TopicProgress[] = session.chosen_topics.map((t) => ({
      topic_id: t,
      deadline: session.deadlines[t] ?? session.opened_at,
      draft: "",
      submitted: false,
      late: null,
    }));
    this.state = { ...this.state, phase: "working", session, progress, current: 0 };
    this.emit();
  }

  // -- per-topic editor ----------------------------------------------------

  currentTopic(): TopicProgress | null {
    if (this.state.phase !== "working") return null;
    return this.state.progress[this.state.current] ?? null;
  }

  /** Reference panel shows only on the server-designated topic. */
  referencesVisible(): boolean {
    const topic = this.currentTopic();
    return (
      topic !== null &&
      this.state.session !== null &&
      topic.topic_id === this.state.session.reference_topic
    );
  }

  remainingMs(): number {
    const topic = this.currentTopic();
    if (topic === null) return 0;
    return Math.max(0, Date.parse(topic.deadline) - this.clock());
  }

  /** Read-only once the window closed or the idea went out. */
  editorLocked(): boolean {
    const topic = this.currentTopic();
    if (topic === null) return true;
    return topic.submitted || Date.parse(topic.deadline) <= this.clock();
  }

  editDraft(text: string): void {
    const topic = this.currentTopic();
    if (topic === null || topic.submitted) return;
    const progress = this.state.progress.map((p, i) =>
      i === this.state.current ? { ...p, draft: text } : p,
    );
    this.state = { ...this.state, progress };
    this.emit();
  }

  async submitIdea(): Promise<void> {
    const topic = this.currentTopic();
    const session = this.state.session;
    if (topic === null || session === null) return;
    if (this.editorLocked() || !topic.draft.trim()) return;
    try {
      const ack = await this.client.submitIdea(session.session_id, topic.topic_id, topic.draft);
      this.markSubmitted(
        topic.topic_id,
        ack.late,
        ack.late ? "Stored, but the server flagged it late." : null,
      );
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        // the server already holds one for this topic (stale view after a reload)
        this.markSubmitted(topic.topic_id, null, messageOf(err));
      } else {
        this.state = { ...this.state, toast: messageOf(err) };
        this.emit();
      }
    }
  }

  /** Move past a topic whose window closed without a submission. */
  nextTopic(): void {
    if (this.state.phase !== "working" || !this.editorLocked()) return;
    this.advance();
  }

  private markSubmitted(topicId: string, late: boolean | null, toast: string | null): void {
    const progress = this.state.progress.map((p) =>
      p.topic_id === topicId ? { ...p, submitted: true, late } : p,
    );
    this.state = { ...this.state, progress, toast };
    this.advance();
  }

  private advance(): void {
    const next = this.state.current + 1;
    if (next >= this.state.progress.length) {
      this.state = { ...this.state, phase: "feedback" };
    } else {
      this.state = { ...this.state, current: next };
    }
    this.emit();
  }

  // -- reference panel -----------------------------------------------------

  toggleTraceMode(): void {
    this.state = {
      ...this.state,
      traceMode: this.state.traceMode === "raw" ? "summary" : "raw",
    };
    this.emit();
  }

  toggleSnippet(ideaId: string, index: number): void {
    const key = `${ideaId}:${index}`;
    this.state = {
      ...this.state,
      openSnippets: { ...this.state.openSnippets, [key]: !this.state.openSnippets[key] },
    };
    this.emit();
  }

  snippetOpen(ideaId: string, index: number): boolean {
    return !!this.state.openSnippets[`${ideaId}:${index}`];
  }

  // -- feedback ------------------------------------------------------------

  setFeedback(key: FeedbackKey, value: FeedbackValue): void {
    if (this.state.phase !== "feedback") return;
    if (!FEEDBACK_KEYS.includes(key) || !FEEDBACK_VALUES.includes(value)) return;
    this.state = { ...this.state, feedback: { ...this.state.feedback, [key]: value } };
    this.emit();
  }

  canFinish(): boolean {
    return (
      this.state.phase === "feedback" &&
      FEEDBACK_KEYS.every((k) => this.state.feedback[k] !== undefined)
    );
  }

  async finish(): Promise<void> {
    if (!this.canFinish()) return;
    const session = this.state.session;
    if (session === null) return;
    const values = this.state.feedback as Record<FeedbackKey, FeedbackValue>;
    try {
      await this.client.submitFeedback(session.session_id, values);
      this.state = { ...this.state, phase: "done", toast: null };
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.state = { ...this.state, phase: "done", toast: messageOf(err) };
      } else {
        this.state = { ...this.state, toast: messageOf(err) };
      }
    }
    this.emit();
  }
}
