// Typed client for the annotation service JSON API. All traffic goes through
// an injectable fetch so the state machines can be exercised against a
// scripted transport; the browser build just uses window.fetch.

export type JudgmentCode = "A" | "Tie" | "B";

export interface IdeaCard {
  id: string;
  topic_id: string;
  research_question: string;
  theory: string;
  hypotheses: string[];
}

export interface TraceStep {
  type: string;
  content: string;
  output?: string | null;
  error?: string | null;
}

export interface DataSnippet {
  index: number;
  name: string;
  lines: string;
}

export interface IdeaDetail extends IdeaCard {
  snippets: DataSnippet[];
  trace: TraceStep[];
  summary: TraceStep[];
}

export interface PairPayload {
  pair_id: string;
  criteria: string[];
  first: IdeaCard;
  second: IdeaCard;
}

export interface JudgmentBody {
  pair_id: string;
  annotator: string;
  values: Record<string, JudgmentCode>;
}

export interface SessionPayload {
  session_id: string;
  participant: string;
  chosen_topics: string[];
  reference_topic: string;
  deadlines: Record<string, string>;
  opened_at: string;
  references: IdeaDetail[];
}

export type FeedbackKey = "reference_ideas" | "data_segments" | "validation_processes";
export type FeedbackValue = "VeryHelpful" | "SomewhatHelpful" | "NotHelpful";

export interface WinRateRow {
  A: number;
  Tie: number;
  B: number;
  n: number;
}

export interface StatsPayload {
  judgments: number;
  alpha: { per_criterion: Record<string, number | null>; average: number | null };
  win_rate: Record<string, WinRateRow | null>;
  ztest: Record<string, { z: number; p: number } | null>;
  elo: {
    criteria: Record<string, Record<string, number>>;
    average: Record<string, number>;
  } | null;
}

/** Non-2xx answer from the service, with the detail string it sent. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export function messageOf(err: unknown): string {
  if (err instanceof Error) return err.message || "network error";
  return String(err);
}

async function detailOf(res: Response): Promise<string> {
  try {
    const body = await res.json();
    if (body && typeof body.detail === "string") return body.detail;
    return JSON.stringify(body);
  } catch {
    return res.statusText || `http ${res.status}`;
  }
}

export class Client {
  constructor(
    private readonly base: string = "",
    private readonly fetcher: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetcher(this.base + path, init);
    if (!res.ok) throw new ApiError(res.status, await detailOf(res));
    return (await res.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  /** Next unjudged pair for this annotator, or null once the queue is exhausted. */
  async nextPair(annotator: string): Promise<PairPayload | null> {
    try {
      return await this.request<PairPayload>(
        `/api/pairs/next?annotator=${encodeURIComponent(annotator)}`,
      );
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) return null;
      throw err;
    }
  }

  submitJudgment(body: JudgmentBody): Promise<{ stored: boolean; pair_id: string }> {
    return this.post("/api/judgments", body);
  }

  idea(ideaId: string): Promise<IdeaDetail> {
    return this.request(`/api/ideas/${encodeURIComponent(ideaId)}`);
  }

  openSession(participant: string, chosenTopics: string[]): Promise<SessionPayload> {
    return this.post("/api/sessions", { participant, chosen_topics: chosenTopics });
  }

  submitIdea(
    sessionId: string,
    topicId: string,
    text: string,
  ): Promise<{ stored: boolean; late: boolean }> {
    return this.post(`/api/sessions/${encodeURIComponent(sessionId)}/ideas`, {
      topic_id: topicId,
      text,
    });
  }

  submitFeedback(
    sessionId: string,
    values: Record<FeedbackKey, FeedbackValue>,
  ): Promise<{ stored: boolean }> {
    return this.post(`/api/sessions/${encodeURIComponent(sessionId)}/feedback`, values);
  }

  stats(): Promise<StatsPayload> {
    return this.request("/api/stats");
  }
}
