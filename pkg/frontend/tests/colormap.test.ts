import { describe, expect, it } from "vitest";

import { rgbToCss, rgbToHex, tensionColor } from "../src/colormap";

describe("tensionColor", () => {
  it("clamps to the bounds", () => {
    const lo = tensionColor(-5, 0.5, 30);
    const atMin = tensionColor(0.5, 0.5, 30);
    expect(lo).toEqual(atMin);
    const hi = tensionColor(100, 0.5, 30);
    const atMax = tensionColor(30, 0.5, 30);
    expect(hi).toEqual(atMax);
  });

  it("moves from blue through green to red", () => {
    const low = tensionColor(0.5, 0.5, 30);
    const mid = tensionColor(15.25, 0.5, 30);
    const high = tensionColor(30, 0.5, 30);
    expect(low.b).toBeGreaterThan(low.r);
    expect(mid.g).toBeGreaterThan(mid.r);
    expect(high.r).toBeGreaterThan(high.b);
    expect(rgbToHex(low)).not.toBe(rgbToHex(high));
  });

  it("formats css colors", () => {
    expect(rgbToCss({ r: 1, g: 0, b: 0 })).toBe("#ff0000");
    expect(rgbToCss({ r: 0, g: 0, b: 0 })).toBe("#000000");
  });
});
