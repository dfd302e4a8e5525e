import * as fs from "fs";
import * as path from "path";

import { GrayImage, readGray } from "./png";

/** One synthesized pair as produced by the solver package's synth CLI. */
export interface Pair {
  id: string;
  rainy: GrayImage;
  clean: GrayImage;
  angleDegrees: number;
  blend: string;
}

/**
 * Load every pair below `dir` (recursing one level, since per-angle
 * synthesis runs write one pair per subdirectory).  Pairs are identified
 * by their `<stem>.spec.json` sidecars.
 */
export function loadPairs(dir: string): Pair[] {
  const sidecars: string[] = [];
  const walk = (d: string, depth: number) => {
    for (const entry of fs.readdirSync(d, { withFileTypes: true })) {
      const p = path.join(d, entry.name);
      if (entry.isDirectory() && depth > 0) walk(p, depth - 1);
      else if (entry.name.endsWith(".spec.json")) sidecars.push(p);
    }
  };
  walk(dir, 1);
  sidecars.sort();

  const pairs: Pair[] = [];
  for (const sidecar of sidecars) {
    const stem = path.basename(sidecar).replace(/\.spec\.json$/, "");
    const base = path.dirname(sidecar);
    const rainyPath = path.join(base, `${stem}.rainy.png`);
    const cleanPath = path.join(base, `${stem}.clean.png`);
    if (!fs.existsSync(rainyPath) || !fs.existsSync(cleanPath)) continue;
    const meta = JSON.parse(fs.readFileSync(sidecar, "utf8"));
    pairs.push({
      id: `${path.basename(base)}/${stem}`,
      rainy: readGray(rainyPath),
      clean: readGray(cleanPath),
      angleDegrees: meta.rain_spec?.angle_degrees ?? 0,
      blend: meta.blend ?? "screen",
    });
  }
  return pairs;
}

/** Stack pair images into flat batch arrays (all tiles must match). */
export function toBatch(pairs: Pair[]): {
  rainy: Float32Array;
  clean: Float32Array;
  angles: Float32Array;
  height: number;
  width: number;
  count: number;
} {
  if (pairs.length === 0) throw new Error("empty pair set");
  const { height, width } = pairs[0].rainy;
  for (const p of pairs) {
    if (p.rainy.height !== height || p.rainy.width !== width) {
      throw new Error("pair tiles have mismatched sizes");
    }
  }
  const n = height * width;
  const rainy = new Float32Array(pairs.length * n);
  const clean = new Float32Array(pairs.length * n);
  const angles = new Float32Array(pairs.length);
  pairs.forEach((p, i) => {
    rainy.set(Float32Array.from(p.rainy.data), i * n);
    clean.set(Float32Array.from(p.clean.data), i * n);
    angles[i] = p.angleDegrees;
  });
  return { rainy, clean, angles, height, width, count: pairs.length };
}
