import { describe, expect, it } from "vitest";

import { Client } from "../src/api.js";
import { JudgingMachine, Side } from "../src/judging.js";
import { CONDITION_KEYS, CRITERIA, collectKeys, pairPayload, pairServer } from "./fakes.js";

const TWO_PAIRS = () => [pairPayload("p1", "idea-a", "idea-b"), pairPayload("p2", "idea-c", "idea-d")];

function machineOver(server: ReturnType<typeof pairServer>, annotator = "ann-1") {
  return new JudgingMachine(new Client("", server.fetcher), annotator);
}

function selectAll(machine: JudgingMachine, sides: Side[]) {
  CRITERIA.forEach((criterion, i) => machine.select(criterion, sides[i % sides.length]!));
}

describe("pair judging", () => {
  it("shows a fresh pair with no selections made", async () => {
    const server = pairServer(TWO_PAIRS());
    const machine = machineOver(server);
    await machine.start();

    expect(machine.state.phase).toBe("judging");
    expect(machine.state.pair?.pair_id).toBe("p1");
    expect(machine.state.pair?.criteria).toEqual(CRITERIA);
    expect(machine.state.selections).toEqual({});
    expect(machine.canSubmit()).toBe(false);
  });

  it("keeps submit disabled until every criterion is set", async () => {
    const server = pairServer(TWO_PAIRS());
    const machine = machineOver(server);
    await machine.start();

    for (const criterion of CRITERIA.slice(0, 4)) {
      machine.select(criterion, "Left");
    }
    expect(machine.canSubmit()).toBe(false);
    await machine.submit();
    expect(server.posts).toHaveLength(0);
    expect(machine.state.pair?.pair_id).toBe("p1");

    machine.select("Overall", "Tie");
    expect(machine.canSubmit()).toBe(true);
  });

  it("ignores selections for criteria the pair does not carry", async () => {
    const server = pairServer(TWO_PAIRS());
    const machine = machineOver(server);
    await machine.start();

    machine.select("Elegance", "Left");
    expect(machine.state.selections).toEqual({});
  });

  it("posts codes mapped from the on-screen sides and advances", async () => {
    const server = pairServer(TWO_PAIRS());
    const machine = machineOver(server);
    await machine.start();

    machine.select("Significance", "Left");
    machine.select("Novelty", "Tie");
    machine.select("Feasibility", "Right");
    machine.select("Expected Effectiveness", "Left");
    machine.select("Overall", "Right");
    await machine.submit();

    expect(server.posts).toHaveLength(1);
    expect(server.posts[0]).toEqual({
      pair_id: "p1",
      annotator: "ann-1",
      values: {
        Significance: "A",
        Novelty: "Tie",
        Feasibility: "B",
        "Expected Effectiveness": "A",
        Overall: "B",
      },
    });
    expect(machine.state.pair?.pair_id).toBe("p2");
    expect(machine.state.selections).toEqual({});
    expect(machine.state.judged).toBe(1);
  });

  it("walks the queue to a completion screen", async () => {
    const server = pairServer(TWO_PAIRS());
    const machine = machineOver(server);
    await machine.start();

    selectAll(machine, ["Left"]);
    await machine.submit();
    selectAll(machine, ["Right"]);
    await machine.submit();

    expect(machine.state.phase).toBe("done");
    expect(machine.state.judged).toBe(2);
    expect(server.posts.map((p) => p.pair_id)).toEqual(["p1", "p2"]);
  });

  it("starts at the completion screen when nothing is eligible", async () => {
    const server = pairServer([]);
    const machine = machineOver(server);
    await machine.start();

    expect(machine.state.phase).toBe("done");
    expect(machine.state.judged).toBe(0);
  });

  it("shows a retry banner when the queue fetch dies, then recovers", async () => {
    const server = pairServer(TWO_PAIRS());
    server.failNext.fetch = true;
    const machine = machineOver(server);
    await machine.start();

    expect(machine.state.phase).toBe("offline");
    expect(machine.state.toast).toBeTruthy();
    expect(server.posts).toHaveLength(0);

    await machine.retry();
    expect(machine.state.phase).toBe("judging");
    expect(machine.state.pair?.pair_id).toBe("p1");
  });

  it("keeps selections when a submit dies mid-flight", async () => {
    const server = pairServer(TWO_PAIRS());
    const machine = machineOver(server);
    await machine.start();

    selectAll(machine, ["Left", "Tie", "Right"]);
    const before = { ...machine.state.selections };
    server.failNext.post = true;
    await machine.submit();

    expect(machine.state.phase).toBe("offline");
    expect(machine.state.pair?.pair_id).toBe("p1");
    expect(machine.state.selections).toEqual(before);
    expect(server.posts).toHaveLength(0);

    await machine.retry();
    expect(server.posts).toHaveLength(1);
    expect(machine.state.pair?.pair_id).toBe("p2");
  });

  it("surfaces a duplicate rejection without advancing", async () => {
    const server = pairServer(TWO_PAIRS());
    const machine = machineOver(server);
    await machine.start();

    selectAll(machine, ["Left"]);
    server.judged.add("p1");
    await machine.submit();

    expect(machine.state.phase).toBe("judging");
    expect(machine.state.pair?.pair_id).toBe("p1");
    expect(machine.state.toast).toContain("duplicate");
    expect(machine.state.selections).not.toEqual({});
    expect(machine.state.judged).toBe(0);
  });

  it("never exposes ordering or condition fields", async () => {
    const server = pairServer(TWO_PAIRS());
    const machine = machineOver(server);
    await machine.start();
    selectAll(machine, ["Left"]);

    const keys = collectKeys(machine.state);
    for (const forbidden of CONDITION_KEYS) {
      expect(keys.has(forbidden)).toBe(false);
    }
  });
});
