/**
 * Model registry and checkpoint loading.
 *
 * A "checkpoint" is a JSON parameter file selecting and configuring one of
 * the bundled models. Load problems (missing file, malformed JSON, model
 * mismatch, unusable pooling setup) must surface before the protocol
 * handshake, so loading throws and the CLI exits nonzero.
 */

import { readFileSync } from "node:fs";

import { assertCloud, histogramDescriptor, maxPoolRows, projectionMatrix } from "./features.js";

export interface FeatureModel {
  name: string;
  dim: number;
  featurize(points: unknown, id: string): number[];
}

export interface ModelOptions {
  model: string;
  checkpointPath?: string;
  device: string;
  pool: boolean;
}

interface Checkpoint {
  model?: string;
  [key: string]: unknown;
}

function readCheckpoint(path: string, expectedModel: string): Checkpoint {
  let raw: string;
  try {
    raw = readFileSync(path, "utf-8");
  } catch (err) {
    throw new Error(`cannot read checkpoint ${path}: ${(err as Error).message}`);
  }
  let doc: Checkpoint;
  try {
    doc = JSON.parse(raw);
  } catch (err) {
    throw new Error(`checkpoint ${path} is not valid JSON: ${(err as Error).message}`);
  }
  if (doc.model !== undefined && doc.model !== expectedModel) {
    throw new Error(
      `checkpoint ${path} is for model ${JSON.stringify(doc.model)}, not ${expectedModel}`,
    );
  }
  return doc;
}

function intParam(doc: Checkpoint, key: string, fallback: number): number {
  const value = doc[key];
  if (value === undefined) return fallback;
  if (typeof value !== "number" || !Number.isInteger(value) || value < 1) {
    throw new Error(`checkpoint parameter ${key} must be a positive integer`);
  }
  return value;
}

export function loadModel(opts: ModelOptions): FeatureModel {
  if (opts.device !== "cpu") {
    throw new Error(`device ${JSON.stringify(opts.device)} is not available; only "cpu" is`);
  }
  const checkpoint = opts.checkpointPath ? readCheckpoint(opts.checkpointPath, opts.model) : {};

  if (opts.model === "histogram") {
    const pairBins = intParam(checkpoint, "pairBins", 64);
    const radialBins = intParam(checkpoint, "radialBins", 32);
    return {
      name: "histogram",
      dim: pairBins + radialBins,
      featurize: (points, id) =>
        histogramDescriptor(assertCloud(points, id), pairBins, radialBins),
    };
  }

  if (opts.model === "projection") {
    if (!opts.pool) {
      throw new Error(
        "the projection model emits per-point feature matrices; " +
          "the protocol carries vectors, so --pool is required",
      );
    }
    const dim = intParam(checkpoint, "dim", 256);
    const seed = intParam(checkpoint, "seed", 7);
    return {
      name: "projection",
      dim,
      featurize: (points, id) =>
        maxPoolRows(projectionMatrix(assertCloud(points, id), dim, seed)),
    };
  }

  throw new Error(
    `unknown model ${JSON.stringify(opts.model)}; available: histogram, projection`,
  );
}
