import { describe, expect, it } from "vitest";

import { ApiError, Client, FetchLike } from "../src/api.js";
import { jsonResponse, pairPayload } from "./fakes.js";

function recordingFetch(answer: () => Response | Promise<Response>) {
  const calls: { url: string; init?: RequestInit }[] = [];
  const fetcher: FetchLike = async (url, init) => {
    calls.push({ url, init });
    return answer();
  };
  return { calls, fetcher };
}

describe("api client", () => {
  it("escapes annotator names in the queue url", async () => {
    const { calls, fetcher } = recordingFetch(() => jsonResponse(200, pairPayload("p1", "a", "b")));
    const client = new Client("", fetcher);
    await client.nextPair("ann 1/ä");

    expect(calls[0]?.url).toBe("/api/pairs/next?annotator=ann%201%2F%C3%A4");
  });

  it("maps queue exhaustion to null", async () => {
    const { fetcher } = recordingFetch(() => jsonResponse(404, { detail: "no eligible pair" }));
    const client = new Client("", fetcher);

    expect(await client.nextPair("ann-1")).toBeNull();
  });

  it("raises a typed error carrying the server detail", async () => {
    const { fetcher } = recordingFetch(() => jsonResponse(400, { detail: "missing annotator" }));
    const client = new Client("", fetcher);

    const failure = await client
      .submitJudgment({ pair_id: "p1", annotator: "", values: {} })
      .then(() => null)
      .catch((err: unknown) => err);

    expect(failure).toBeInstanceOf(ApiError);
    expect((failure as ApiError).status).toBe(400);
    expect((failure as ApiError).message).toBe("missing annotator");
  });

  it("propagates transport failures untouched", async () => {
    const boom = new TypeError("fetch failed");
    const client = new Client("", async () => {
      throw boom;
    });

    await expect(client.stats()).rejects.toBe(boom);
  });

  it("prefixes every path with the configured base", async () => {
    const { calls, fetcher } = recordingFetch(() => jsonResponse(200, { stored: true, late: false }));
    const client = new Client("http://127.0.0.1:9999", fetcher);
    await client.submitIdea("s-0001", "topic-01", "an idea");

    expect(calls[0]?.url).toBe("http://127.0.0.1:9999/api/sessions/s-0001/ideas");
    expect(JSON.parse(String(calls[0]?.init?.body))).toEqual({
      topic_id: "topic-01",
      text: "an idea",
    });
  });

  it("posts feedback as a bare three-key object", async () => {
    const { calls, fetcher } = recordingFetch(() => jsonResponse(200, { stored: true }));
    const client = new Client("", fetcher);
    await client.submitFeedback("s-0001", {
      reference_ideas: "VeryHelpful",
      data_segments: "NotHelpful",
      validation_processes: "SomewhatHelpful",
    });

    expect(calls[0]?.url).toBe("/api/sessions/s-0001/feedback");
    expect(JSON.parse(String(calls[0]?.init?.body))).toEqual({
      reference_ideas: "VeryHelpful",
      data_segments: "NotHelpful",
      validation_processes: "SomewhatHelpful",
    });
  });
});
