/** Tension colormap over [tension_min, tension_max]: cool blue at the lower
 * bound through green at midrange to red at saturation. */

export interface Rgb {
  r: number;
  g: number;
  b: number;
}

const STOPS: [number, Rgb][] = [
  [0.0, { r: 0.15, g: 0.35, b: 0.95 }],
  [0.5, { r: 0.1, g: 0.85, b: 0.3 }],
  [1.0, { r: 0.95, g: 0.2, b: 0.15 }],
];

export function tensionColor(t: number, tmin: number, tmax: number): Rgb {
  const u = tmax > tmin ? Math.min(1, Math.max(0, (t - tmin) / (tmax - tmin))) : 0;
  for (let i = 0; i < STOPS.length - 1; i++) {
    const [u0, c0] = STOPS[i];
    const [u1, c1] = STOPS[i + 1];
    if (u <= u1 || i === STOPS.length - 2) {
      const f = (u - u0) / (u1 - u0);
      const g = Math.min(1, Math.max(0, f));
      return {
        r: c0.r + g * (c1.r - c0.r),
        g: c0.g + g * (c1.g - c0.g),
        b: c0.b + g * (c1.b - c0.b),
      };
    }
  }
  return STOPS[STOPS.length - 1][1];
}

export function rgbToHex(c: Rgb): number {
  const r = Math.round(c.r * 255);
  const g = Math.round(c.g * 255);
  const b = Math.round(c.b * 255);
  return (r << 16) | (g << 8) | b;
}

export function rgbToCss(c: Rgb): string {
  return `#${rgbToHex(c).toString(16).padStart(6, "0")}`;
}
