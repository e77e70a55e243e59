import { describe, expect, it } from "vitest";

import { commandMessage, parseServerMessage } from "../src/protocol";

const frameDoc = {
  type: "frame",
  tick: 42,
  sim_time: 0.042,
  position: [0.1, -0.2, 0.3],
  quaternion: [1, 0, 0, 0],
  wrench: [0, 0, 4, 0, 0, 0],
  tensions: [15, 15, 15, 15, 15, 15, 15, 15],
  solver_status: 0,
  trigger: false,
  contacts: [{ point: [0, 0, 0], normal: [0, 0, 1], depth: 0.002 }],
  bead_delta: [[0.1, 0.0, 0.0]],
};

describe("parseServerMessage", () => {
  it("parses a frame", () => {
    const msg = parseServerMessage(JSON.stringify(frameDoc));
    expect(msg.type).toBe("frame");
    if (msg.type === "frame") {
      expect(msg.tick).toBe(42);
      expect(msg.contacts).toHaveLength(1);
      expect(msg.bead_delta).toHaveLength(1);
    }
  });

  it("rejects malformed frames", () => {
    expect(() => parseServerMessage("not json")).toThrow();
    expect(() => parseServerMessage("{}")).toThrow();
    for (const [key, value] of [
      ["tick", -1],
      ["tensions", [1, 2, 3]],
      ["position", [0, 0, "x"]],
      ["solver_status", 9],
      ["quaternion", [1, 0, 0]],
    ] as const) {
      const bad = { ...frameDoc, [key]: value };
      expect(() => parseServerMessage(JSON.stringify(bad)), key).toThrow();
    }
  });

  it("round-trips a command message", () => {
    const text = commandMessage(7, [0.1, 0.2, 0.3], [1, 0, 0, 0], true);
    const doc = JSON.parse(text);
    expect(doc).toEqual({
      type: "command",
      seq: 7,
      position: [0.1, 0.2, 0.3],
      quaternion: [1, 0, 0, 0],
      trigger: true,
    });
  });
});
