/**
 * Anchor generation: a procedural stand-in for a text-to-3D model.
 *
 * The prompt text hashes to a base shape family whose parameters and noise
 * are modulated by the seed, so different seeds give genuinely different
 * anchor geometry for the same prompt while staying fully reproducible.
 * Output is one .xyz per (prompt, seed) plus a manifest in the schema the
 * classifier's bank builder consumes. Failed entries are skipped and
 * logged, never silently included.
 */

import { mkdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import { combineSeeds, gaussian, hashText, mulberry32, randomRotation, rotate } from "./rng.js";

export const SEED_RANGE = 50; // generation seeds are drawn from [0, 50)

export interface GenerateOptions {
  prompts: Record<string, string[]>; // category name -> prompt texts
  seeds: number[];
  outDir: string;
  pointsPerCloud: number;
  noise: number;
  generatorTag: string;
}

export interface SkippedEntry {
  category: string;
  promptIndex: number;
  seed: number;
  reason: string;
}

export interface GenerateResult {
  written: string[];
  skipped: SkippedEntry[];
  manifestPath: string;
}

type Sampler = (rand: () => number, stretch: number) => [number, number, number];

const FAMILIES: Sampler[] = [
  // shell
  (rand, stretch) => {
    const x = gaussian(rand), y = gaussian(rand), z = gaussian(rand);
    const n = Math.sqrt(x * x + y * y + z * z) || 1;
    return [x / n, y / n, (z / n) * stretch];
  },
  // box surface
  (rand, stretch) => {
    const p: [number, number, number] = [
      2 * rand() - 1, 2 * rand() - 1, (2 * rand() - 1) * stretch,
    ];
    const axis = Math.floor(rand() * 3);
    p[axis] = (rand() < 0.5 ? -1 : 1) * (axis === 2 ? stretch : 1);
    return p;
  },
  // tube
  (rand, stretch) => {
    const theta = 2 * Math.PI * rand();
    const r = 0.35 + 0.25 * stretch;
    return [r * Math.cos(theta), r * Math.sin(theta), 2 * rand() - 1];
  },
  // ring
  (rand, stretch) => {
    const u = 2 * Math.PI * rand();
    const v = 2 * Math.PI * rand();
    const tube = 0.2 + 0.15 * stretch;
    const radial = 0.7 + tube * Math.cos(v);
    return [radial * Math.cos(u), radial * Math.sin(u), tube * Math.sin(v)];
  },
  // slab pair
  (rand, stretch) => {
    if (rand() < 0.6) {
      return [2 * rand() - 1, 2 * rand() - 1, 0.4 * stretch];
    }
    return [1.6 * rand() - 0.8, 0, rand() * 1.4 - 1.0];
  },
];

export function synthesizeCloud(
  prompt: string,
  seed: number,
  nPoints: number,
  noise: number,
): number[][] {
  if (prompt.trim() === "") {
    throw new Error("empty prompt gives the generator nothing to work with");
  }
  if (nPoints < 2) {
    throw new Error(`cannot synthesize a cloud of ${nPoints} points`);
  }
  const promptHash = hashText(prompt.trim());
  const family = FAMILIES[promptHash % FAMILIES.length];
  const rand = mulberry32(combineSeeds(promptHash, seed));
  const stretch = 0.75 + 0.5 * rand(); // seed-modulated proportions
  const pose = randomRotation(rand);
  const points: number[][] = [];
  for (let i = 0; i < nPoints; i++) {
    const [x, y, z] = family(rand, stretch);
    points.push([
      x + noise * gaussian(rand),
      y + noise * gaussian(rand),
      z + noise * gaussian(rand),
    ]);
  }
  return rotate(points, pose);
}

function toXyz(points: number[][]): string {
  return points.map(([x, y, z]) => `${x} ${y} ${z}`).join("\n") + "\n";
}

export function generateAnchors(opts: GenerateOptions): GenerateResult {
  const categories = Object.keys(opts.prompts);
  if (categories.length === 0) {
    throw new Error("no categories given");
  }
  if (opts.seeds.length === 0) {
    throw new Error("no seeds requested; the manifest would be empty");
  }
  for (const seed of opts.seeds) {
    if (!Number.isInteger(seed) || seed < 0 || seed >= SEED_RANGE) {
      throw new Error(`seed ${seed} outside the generation range [0, ${SEED_RANGE})`);
    }
  }

  mkdirSync(opts.outDir, { recursive: true });
  const written: string[] = [];
  const skipped: SkippedEntry[] = [];
  const manifest: { categories: object[] } = { categories: [] };

  for (const category of categories) {
    const prompts = opts.prompts[category];
    if (!Array.isArray(prompts) || prompts.length === 0) {
      throw new Error(`category ${category} has no prompts`);
    }
    const anchors: object[] = [];
    prompts.forEach((prompt, promptIndex) => {
      for (const seed of opts.seeds) {
        const file = `${category}_p${promptIndex}_s${seed}.xyz`;
        try {
          const cloud = synthesizeCloud(prompt, seed, opts.pointsPerCloud, opts.noise);
          writeFileSync(join(opts.outDir, file), toXyz(cloud), "utf-8");
        } catch (err) {
          const reason = (err as Error).message;
          console.error(
            `skipping ${category} prompt ${promptIndex} seed ${seed}: ${reason}`,
          );
          skipped.push({ category, promptIndex, seed, reason });
          continue;
        }
        written.push(file);
        anchors.push({
          file,
          generator: opts.generatorTag,
          seed,
          prompt_index: promptIndex,
        });
      }
    });
    if (anchors.length === 0) {
      throw new Error(`every generation for category ${category} failed`);
    }
    manifest.categories.push({ name: category, prompts, anchors });
  }

  const manifestPath = join(opts.outDir, "anchors.manifest.json");
  writeFileSync(manifestPath, JSON.stringify(manifest, null, 2) + "\n", "utf-8");
  return { written, skipped, manifestPath };
}

/** Draw distinct generation seeds from [0, SEED_RANGE) given a master seed. */
export function drawSeeds(count: number, masterSeed: number): number[] {
  if (count < 1) throw new Error("seed count must be positive");
  if (count > SEED_RANGE) {
    throw new Error(`cannot draw ${count} distinct seeds from [0, ${SEED_RANGE})`);
  }
  const rand = mulberry32(combineSeeds(0xa11c0de, masterSeed));
  const pool = Array.from({ length: SEED_RANGE }, (_, i) => i);
  for (let i = pool.length - 1; i > 0; i--) {
    const j = Math.floor(rand() * (i + 1));
    [pool[i], pool[j]] = [pool[j], pool[i]];
  }
  return pool.slice(0, count);
}
