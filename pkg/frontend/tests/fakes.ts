// Scripted transports and payload builders shaped like the real service
// responses, so the machines can be driven without a server.

import {
  FetchLike,
  IdeaCard,
  IdeaDetail,
  JudgmentBody,
  PairPayload,
  SessionPayload,
} from "../src/api.js";

export const CRITERIA = [
  "Significance",
  "Novelty",
  "Feasibility",
  "Expected Effectiveness",
  "Overall",
];

export const OPENED_AT = "2026-08-22T10:00:00.000Z";

export function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

export function card(id: string): IdeaCard {
  return {
    id,
    topic_id: "topic-01",
    research_question: `How does ${id} shape outcomes?`,
    theory: `A short theory for ${id}.`,
    hypotheses: [`${id} raises the outcome.`, `${id} interacts with context.`],
  };
}

export function pairPayload(pairId: string, left: string, right: string): PairPayload {
  return { pair_id: pairId, criteria: [...CRITERIA], first: card(left), second: card(right) };
}

export function referenceIdea(id: string): IdeaDetail {
  return {
    ...card(id),
    snippets: [
      { index: 5, name: "regional gdp", lines: "year,region,gdp\n1990,north,1.10\n" },
      { index: 6, name: "attendance log", lines: "date,count\n2001-03-04,44\n" },
    ],
    trace: [
      { type: "text", content: `Plan for ${id}: inspect the data, then test.` },
      { type: "code", content: "print('n =', 6)", output: "n = 6\n", error: null },
      { type: "text", content: "Hypothesis 1: Supported" },
    ],
    summary: [
      { type: "text", content: `Loaded the data behind ${id}.` },
      { type: "text", content: "The effect held in the pooled sample." },
    ],
  };
}

export function sessionPayload(
  participant: string,
  chosen: [string, string],
  referenceTopic: string,
): SessionPayload {
  const opened = Date.parse(OPENED_AT);
  const minutes = (n: number) => new Date(opened + n * 60_000).toISOString();
  return {
    session_id: "s-0001",
    participant,
    chosen_topics: [...chosen],
    reference_topic: referenceTopic,
    deadlines: { [chosen[0]]: minutes(20), [chosen[1]]: minutes(40) },
    opened_at: new Date(opened).toISOString(),
    references: [referenceIdea("ref-a"), referenceIdea("ref-b"), referenceIdea("ref-c")],
  };
}

// -- pair judging transport ------------------------------------------------

export interface PairServer {
  fetcher: FetchLike;
  posts: JudgmentBody[];
  judged: Set<string>;
  failNext: { fetch: boolean; post: boolean };
}

export function pairServer(pairs: PairPayload[]): PairServer {
  const judged = new Set<string>();
  const posts: JudgmentBody[] = [];
  const failNext = { fetch: false, post: false };
  const fetcher: FetchLike = async (url, init) => {
    if (url.includes("/api/pairs/next")) {
      if (failNext.fetch) {
        failNext.fetch = false;
        throw new TypeError("fetch failed");
      }
      const next = pairs.find((p) => !judged.has(p.pair_id));
      return next
        ? jsonResponse(200, next)
        : jsonResponse(404, { detail: "no eligible pair for this annotator" });
    }
    if (url.endsWith("/api/judgments") && init?.method === "POST") {
      if (failNext.post) {
        failNext.post = false;
        throw new TypeError("fetch failed");
      }
      const body = JSON.parse(String(init.body)) as JudgmentBody;
      if (judged.has(body.pair_id)) {
        return jsonResponse(409, { detail: "duplicate judgment for this pair" });
      }
      posts.push(body);
      judged.add(body.pair_id);
      return jsonResponse(200, { stored: true, pair_id: body.pair_id });
    }
    return jsonResponse(404, { detail: `no route for ${url}` });
  };
  return { fetcher, posts, judged, failNext };
}

// -- study transport -------------------------------------------------------

export interface StudyServer {
  fetcher: FetchLike;
  openBodies: { participant: string; chosen_topics: string[] }[];
  ideaBodies: { topic_id: string; text: string }[];
  feedbackBodies: Record<string, string>[];
  submittedTopics: Set<string>;
  referenceTopic: string;
  lateAnswer: boolean;
  feedbackStored: boolean;
  failNext: { open: boolean };
}

export function studyServer(referenceTopic: string): StudyServer {
  const server: StudyServer = {
    fetcher: async () => jsonResponse(500, { detail: "unset" }),
    openBodies: [],
    ideaBodies: [],
    feedbackBodies: [],
    submittedTopics: new Set(),
    referenceTopic,
    lateAnswer: false,
    feedbackStored: false,
    failNext: { open: false },
  };
  server.fetcher = async (url, init) => {
    if (url.endsWith("/api/sessions") && init?.method === "POST") {
      if (server.failNext.open) {
        server.failNext.open = false;
        throw new TypeError("fetch failed");
      }
      const body = JSON.parse(String(init.body)) as {
        participant: string;
        chosen_topics: string[];
      };
      server.openBodies.push(body);
      const chosen = body.chosen_topics;
      if (chosen.length !== 2) return jsonResponse(400, { detail: "choose exactly 2 topics" });
      const reference = chosen.includes(server.referenceTopic)
        ? server.referenceTopic
        : chosen[1]!;
      return jsonResponse(200, sessionPayload(body.participant, [chosen[0]!, chosen[1]!], reference));
    }
    if (url.includes("/ideas") && init?.method === "POST") {
      const body = JSON.parse(String(init.body)) as { topic_id: string; text: string };
      if (server.submittedTopics.has(body.topic_id)) {
        return jsonResponse(409, { detail: "an idea for this topic was already submitted" });
      }
      server.ideaBodies.push(body);
      server.submittedTopics.add(body.topic_id);
      return jsonResponse(200, { stored: true, late: server.lateAnswer });
    }
    if (url.includes("/feedback") && init?.method === "POST") {
      if (server.feedbackStored) {
        return jsonResponse(409, { detail: "feedback was already submitted" });
      }
      server.feedbackBodies.push(JSON.parse(String(init.body)) as Record<string, string>);
      server.feedbackStored = true;
      return jsonResponse(200, { stored: true });
    }
    return jsonResponse(404, { detail: `no route for ${url}` });
  };
  return server;
}

// -- structural blinding helper --------------------------------------------

export function collectKeys(value: unknown, into = new Set<string>()): Set<string> {
  if (Array.isArray(value)) {
    for (const item of value) collectKeys(item, into);
  } else if (value && typeof value === "object") {
    for (const [key, child] of Object.entries(value)) {
      into.add(key);
      collectKeys(child, into);
    }
  }
  return into;
}

export const CONDITION_KEYS = [
  "order",
  "with_metadata",
  "with_validation",
  "ground_truth",
  "condition",
];
