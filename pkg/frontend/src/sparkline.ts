import type { PowerSample } from "./model.js";

/**
 * SVG path for a power sparkline. X spans the sampled time range, Y runs
 * from zero to the sample maximum; the baseline stays at zero so a flat
 * standby floor reads as low rather than as noise.
 */
export function sparklinePath(
  samples: readonly PowerSample[],
  width: number,
  height: number,
): string {
  if (samples.length === 0) return "";
  const t0 = samples[0].timeS;
  const t1 = samples[samples.length - 1].timeS;
  const span = t1 - t0;
  const peak = Math.max(...samples.map((s) => s.watts), 1e-9);

  const x = (t: number) => (span === 0 ? 0 : ((t - t0) / span) * width);
  const y = (w: number) => height - (w / peak) * height;

  const parts = samples.map((s, i) => {
    const cmd = i === 0 ? "M" : "L";
    return `${cmd}${round2(x(s.timeS))},${round2(y(s.watts))}`;
  });
  return parts.join(" ");
}

function round2(value: number): number {
  return Math.round(value * 100) / 100;
}
