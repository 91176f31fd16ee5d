/**
 * Deterministic randomness: a small 32-bit PRNG plus helpers.
 * Everything the adapter generates must be reproducible from (prompt, seed).
 */

import { createHash } from "node:crypto";

/** Mulberry32: tiny, fast, good enough for procedural geometry. */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

/** Fold any number of integer streams into one 32-bit seed. */
export function combineSeeds(...parts: number[]): number {
  let h = 0x9e3779b9;
  for (const p of parts) {
    h ^= (p >>> 0) + 0x9e3779b9 + ((h << 6) | 0) + (h >>> 2);
    h |= 0;
  }
  return h >>> 0;
}

/** First four bytes of sha256(text) as a uint32. */
export function hashText(text: string): number {
  const digest = createHash("sha256").update(text, "utf-8").digest();
  return digest.readUInt32LE(0);
}

/** Standard normal via Box-Muller. */
export function gaussian(rand: () => number): number {
  let u = 0;
  while (u === 0) u = rand();
  return Math.sqrt(-2 * Math.log(u)) * Math.cos(2 * Math.PI * rand());
}

/** Uniform rotation matrix from a normalized 4-D gaussian quaternion. */
export function randomRotation(rand: () => number): number[][] {
  let w = 0, x = 0, y = 0, z = 0, norm = 0;
  while (norm < 1e-12) {
    w = gaussian(rand);
    x = gaussian(rand);
    y = gaussian(rand);
    z = gaussian(rand);
    norm = Math.sqrt(w * w + x * x + y * y + z * z);
  }
  w /= norm; x /= norm; y /= norm; z /= norm;
  return [
    [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
    [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
    [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
  ];
}

export function rotate(points: number[][], m: number[][]): number[][] {
  // row-vector convention: p' = p . M
  return points.map(([x, y, z]) => [
    x * m[0][0] + y * m[1][0] + z * m[2][0],
    x * m[0][1] + y * m[1][1] + z * m[2][1],
    x * m[0][2] + y * m[1][2] + z * m[2][2],
  ]);
}
