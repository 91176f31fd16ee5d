#!/usr/bin/env node
/**
 * anchorcloud-adapter CLI.
 *
 *   serve            speak the bridge protocol on stdin/stdout
 *   generate-anchors write procedural anchor .xyz files plus a manifest
 *
 * Model/checkpoint problems exit nonzero with a message on stderr before
 * any protocol traffic.
 */

import { readFileSync } from "node:fs";

import { drawSeeds, generateAnchors } from "./generate.js";
import { loadModel } from "./models.js";
import { serve } from "./protocol.js";

interface Parsed {
  positional: string[];
  flags: Map<string, string | boolean>;
}

function parseArgs(argv: string[]): Parsed {
  const positional: string[] = [];
  const flags = new Map<string, string | boolean>();
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (!arg.startsWith("--")) {
      positional.push(arg);
      continue;
    }
    const name = arg.slice(2);
    if (name.startsWith("no-")) {
      flags.set(name.slice(3), false);
    } else if (i + 1 < argv.length && !argv[i + 1].startsWith("--")) {
      flags.set(name, argv[++i]);
    } else {
      flags.set(name, true);
    }
  }
  return { positional, flags };
}

function stringFlag(parsed: Parsed, name: string, fallback?: string): string | undefined {
  const value = parsed.flags.get(name);
  if (value === undefined) return fallback;
  if (typeof value !== "string") throw new Error(`--${name} needs a value`);
  return value;
}

function intFlag(parsed: Parsed, name: string, fallback: number): number {
  const raw = stringFlag(parsed, name);
  if (raw === undefined) return fallback;
  const value = Number(raw);
  if (!Number.isInteger(value)) throw new Error(`--${name} must be an integer, got ${raw}`);
  return value;
}

function boolFlag(parsed: Parsed, name: string, fallback: boolean): boolean {
  const value = parsed.flags.get(name);
  if (value === undefined) return fallback;
  if (typeof value === "boolean") return value;
  if (value === "true") return true;
  if (value === "false") return false;
  throw new Error(`--${name} is a switch (use --${name} or --no-${name})`);
}

const USAGE = `usage:
  anchorcloud-adapter serve [--model histogram|projection] [--checkpoint file.json]
                            [--device cpu] [--pool|--no-pool] [--batch-limit N] [--name NAME]
  anchorcloud-adapter generate-anchors --prompts prompts.json --out DIR
                            (--seeds 0,8,13 | --count N [--master-seed M])
                            [--points N] [--noise SIGMA] [--generator TAG]

prompts.json maps each category name to a list of prompt texts.`;

function cmdServe(parsed: Parsed): number {
  const model = loadModel({
    model: stringFlag(parsed, "model", "histogram")!,
    checkpointPath: stringFlag(parsed, "checkpoint"),
    device: stringFlag(parsed, "device", "cpu")!,
    pool: boolFlag(parsed, "pool", true),
  });
  const batchLimit = intFlag(parsed, "batch-limit", 32);
  if (batchLimit < 1) throw new Error("--batch-limit must be positive");
  serve({ model, batchLimit, name: stringFlag(parsed, "name") });
  return 0; // serve() keeps the process alive; exit happens on shutdown/EOF
}

function cmdGenerateAnchors(parsed: Parsed): number {
  const promptsPath = stringFlag(parsed, "prompts");
  const outDir = stringFlag(parsed, "out");
  if (!promptsPath || !outDir) throw new Error("generate-anchors needs --prompts and --out");
  const prompts = JSON.parse(readFileSync(promptsPath, "utf-8"));

  let seeds: number[];
  const seedsFlag = stringFlag(parsed, "seeds");
  if (seedsFlag !== undefined) {
    seeds = seedsFlag.split(",").filter((s) => s.length > 0).map(Number);
  } else {
    seeds = drawSeeds(intFlag(parsed, "count", 7), intFlag(parsed, "master-seed", 0));
  }

  const result = generateAnchors({
    prompts,
    seeds,
    outDir,
    pointsPerCloud: intFlag(parsed, "points", 2048),
    noise: Number(stringFlag(parsed, "noise", "0.02")),
    generatorTag: stringFlag(parsed, "generator", "procedural")!,
  });
  console.error(
    `wrote ${result.written.length} anchor clouds` +
      (result.skipped.length ? ` (${result.skipped.length} skipped)` : "") +
      ` and ${result.manifestPath}`,
  );
  return 0;
}

function main(): number {
  const parsed = parseArgs(process.argv.slice(2));
  const command = parsed.positional[0];
  try {
    if (command === "serve") return cmdServe(parsed);
    if (command === "generate-anchors") return cmdGenerateAnchors(parsed);
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
  console.error(USAGE);
  return command === undefined || command === "help" ? 0 : 2;
}

const code = main();
if (code !== 0) process.exit(code);
