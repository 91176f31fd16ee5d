/**
 * Feature extraction math for the two bundled models.
 *
 * The histogram model bins all pairwise distances and point radii of a
 * normalized cloud with linear-interpolation (soft) binning, which makes it
 * exactly rotation- and permutation-invariant. The projection model
 * computes a seeded sinusoidal per-point feature matrix (features x points)
 * that is deliberately NOT rotation-invariant; it exists to exercise the
 * matrix-feature + max-pool path.
 */

import { gaussian, mulberry32 } from "./rng.js";

export function assertCloud(points: unknown, id: string): number[][] {
  if (!Array.isArray(points) || points.length === 0) {
    throw new Error(`cloud ${id}: points must be a non-empty array`);
  }
  for (const p of points) {
    if (
      !Array.isArray(p) ||
      p.length !== 3 ||
      p.some((v) => typeof v !== "number" || !Number.isFinite(v))
    ) {
      throw new Error(`cloud ${id}: every point must be three finite numbers`);
    }
  }
  return points as number[][];
}

export function softHistogram(values: ArrayLike<number>, bins: number, range: number): number[] {
  const sorted = Array.prototype.slice.call(values).sort((a: number, b: number) => a - b);
  const hist = new Array<number>(bins).fill(0);
  const scale = bins / range;
  for (const v of sorted) {
    const u = v * scale - 0.5;
    const lo = Math.floor(u);
    const frac = u - lo;
    hist[Math.min(bins - 1, Math.max(0, lo))] += 1 - frac;
    hist[Math.min(bins - 1, Math.max(0, lo + 1))] += frac;
  }
  let total = 0;
  for (const h of hist) total += h;
  return hist.map((h) => h / total);
}

export function histogramDescriptor(
  points: number[][],
  pairBins: number,
  radialBins: number,
): number[] {
  const n = points.length;
  if (n < 2) throw new Error(`cloud has ${n} points; need at least 2`);
  const distances = new Float64Array((n * (n - 1)) / 2);
  let k = 0;
  for (let i = 0; i < n; i++) {
    const xi = points[i][0], yi = points[i][1], zi = points[i][2];
    for (let j = i + 1; j < n; j++) {
      const dx = xi - points[j][0];
      const dy = yi - points[j][1];
      const dz = zi - points[j][2];
      distances[k++] = Math.sqrt(dx * dx + dy * dy + dz * dz);
    }
  }
  const radii = points.map(([x, y, z]) => Math.sqrt(x * x + y * y + z * z));
  return [
    ...softHistogram(distances, pairBins, 2.0),
    ...softHistogram(radii, radialBins, 1.0),
  ];
}

/**
 * Seeded per-point feature matrix, shape (dim x numPoints). Each feature is
 * a sinusoidal projection gated by a Gaussian window around a fixed spatial
 * anchor, so responses depend on where points sit in the frame and the
 * pooled vector changes under rotation (the whole point of this model).
 */
export function projectionMatrix(points: number[][], dim: number, seed: number): number[][] {
  const rand = mulberry32(seed);
  const matrix: number[][] = [];
  for (let f = 0; f < dim; f++) {
    const wx = 2 * gaussian(rand);
    const wy = 2 * gaussian(rand);
    const wz = 2 * gaussian(rand);
    const phase = 2 * Math.PI * rand();
    const cx = 0.7 * gaussian(rand);
    const cy = 0.7 * gaussian(rand);
    const cz = 0.7 * gaussian(rand);
    matrix.push(
      points.map(([x, y, z]) => {
        const falloff =
          ((x - cx) ** 2 + (y - cy) ** 2 + (z - cz) ** 2) / (2 * 0.45 ** 2);
        return Math.sin(wx * x + wy * y + wz * z + phase) * Math.exp(-falloff);
      }),
    );
  }
  return matrix;
}

/** Max over the token axis (columns), collapsing (F x T) to an F-vector. */
export function maxPoolRows(matrix: number[][]): number[] {
  return matrix.map((row) => {
    if (row.length === 0) throw new Error("cannot pool an empty row");
    let best = -Infinity;
    for (const v of row) if (v > best) best = v;
    return best;
  });
}
