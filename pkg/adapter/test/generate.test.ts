import { existsSync, mkdtempSync, readFileSync, readdirSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, test } from "vitest";

import { drawSeeds, generateAnchors, synthesizeCloud, SEED_RANGE } from "../src/generate.js";

function tempDir(): string {
  return mkdtempSync(join(tmpdir(), "adapter-gen-"));
}

const PROMPTS = {
  crate: ["A wooden crate."],
  bowl: ["A round bowl.", "A deep ceramic bowl."],
};

describe("synthesizeCloud", () => {
  test("deterministic for (prompt, seed)", () => {
    const a = synthesizeCloud("A chair.", 5, 64, 0.02);
    const b = synthesizeCloud("A chair.", 5, 64, 0.02);
    expect(b).toEqual(a);
  });

  test("different seeds vary the geometry", () => {
    const a = synthesizeCloud("A chair.", 1, 64, 0.02);
    const b = synthesizeCloud("A chair.", 2, 64, 0.02);
    expect(b).not.toEqual(a);
  });

  test("empty prompt is a generation failure", () => {
    expect(() => synthesizeCloud("   ", 0, 64, 0.02)).toThrow(/empty prompt/);
  });
});

describe("generateAnchors", () => {
  test("writes one file per (prompt, seed) plus a valid manifest", () => {
    const out = tempDir();
    const seeds = [0, 8, 13, 21, 34, 42, 49];
    const result = generateAnchors({
      prompts: PROMPTS,
      seeds,
      outDir: out,
      pointsPerCloud: 96,
      noise: 0.02,
      generatorTag: "procedural",
    });
    // crate: 1 prompt x 7 seeds; bowl: 2 prompts x 7 seeds
    expect(result.written).toHaveLength(21);
    expect(result.skipped).toHaveLength(0);

    const manifest = JSON.parse(readFileSync(result.manifestPath, "utf-8"));
    expect(manifest.categories.map((c: any) => c.name)).toEqual(["crate", "bowl"]);
    const crate = manifest.categories[0];
    expect(crate.anchors).toHaveLength(7);
    expect(crate.anchors.map((a: any) => a.seed)).toEqual(seeds);
    for (const anchor of crate.anchors) {
      expect(anchor.generator).toBe("procedural");
      expect(anchor.prompt_index).toBe(0);
      expect(existsSync(join(out, anchor.file))).toBe(true);
    }
    const bowl = manifest.categories[1];
    expect(new Set(bowl.anchors.map((a: any) => a.prompt_index))).toEqual(new Set([0, 1]));

    // every .xyz row is three numbers
    for (const file of readdirSync(out).filter((f) => f.endsWith(".xyz"))) {
      const rows = readFileSync(join(out, file), "utf-8").trim().split("\n");
      expect(rows).toHaveLength(96);
      for (const row of rows) {
        const fields = row.split(/\s+/).map(Number);
        expect(fields).toHaveLength(3);
        expect(fields.every(Number.isFinite)).toBe(true);
      }
    }
  });

  test("rerun produces an identical manifest", () => {
    const opts = {
      prompts: PROMPTS,
      seeds: [1, 2, 3],
      pointsPerCloud: 48,
      noise: 0.02,
      generatorTag: "procedural",
    };
    const a = generateAnchors({ ...opts, outDir: tempDir() });
    const b = generateAnchors({ ...opts, outDir: tempDir() });
    const strip = (path: string) => readFileSync(path, "utf-8");
    expect(strip(b.manifestPath)).toEqual(strip(a.manifestPath));
  });

  test("zero seeds is rejected", () => {
    expect(() =>
      generateAnchors({
        prompts: PROMPTS,
        seeds: [],
        outDir: tempDir(),
        pointsPerCloud: 48,
        noise: 0.02,
        generatorTag: "procedural",
      }),
    ).toThrow(/no seeds/);
  });

  test("seeds outside the generation range are rejected", () => {
    expect(() =>
      generateAnchors({
        prompts: PROMPTS,
        seeds: [SEED_RANGE],
        outDir: tempDir(),
        pointsPerCloud: 48,
        noise: 0.02,
        generatorTag: "procedural",
      }),
    ).toThrow(/outside the generation range/);
  });

  test("failed entries are skipped and left out of the manifest", () => {
    const out = tempDir();
    const result = generateAnchors({
      prompts: { mixed: ["A good prompt.", "   "] },
      seeds: [0, 1],
      outDir: out,
      pointsPerCloud: 48,
      noise: 0.02,
      generatorTag: "procedural",
    });
    expect(result.written).toHaveLength(2);
    expect(result.skipped).toHaveLength(2);
    expect(result.skipped.every((s) => s.promptIndex === 1)).toBe(true);
    const manifest = JSON.parse(readFileSync(result.manifestPath, "utf-8"));
    expect(manifest.categories[0].anchors).toHaveLength(2);
  });

  test("a category with nothing but failures aborts", () => {
    expect(() =>
      generateAnchors({
        prompts: { hollow: ["  "] },
        seeds: [0],
        outDir: tempDir(),
        pointsPerCloud: 48,
        noise: 0.02,
        generatorTag: "procedural",
      }),
    ).toThrow(/every generation/);
  });
});

describe("drawSeeds", () => {
  test("distinct, in range, deterministic", () => {
    const seeds = drawSeeds(7, 0);
    expect(seeds).toHaveLength(7);
    expect(new Set(seeds).size).toBe(7);
    expect(seeds.every((s) => s >= 0 && s < SEED_RANGE)).toBe(true);
    expect(drawSeeds(7, 0)).toEqual(seeds);
    expect(drawSeeds(7, 1)).not.toEqual(seeds);
  });

  test("cannot draw more than the range holds", () => {
    expect(() => drawSeeds(51, 0)).toThrow(/cannot draw/);
  });
});
