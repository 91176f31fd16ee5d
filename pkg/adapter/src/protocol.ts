/**
 * The bridge protocol server loop: line-delimited JSON over stdin/stdout.
 *
 *   -> {"op": "hello"}
 *   <- {"name": ..., "dim": D, "batch_limit": B}
 *   -> {"op": "featurize", "clouds": [{"id", "points"}, ...]}
 *   <- {"features": [{"id", "vector"}, ...]}   (ids echoed in request order)
 *   -> {"op": "shutdown"}                       (exit 0, no response)
 *
 * Per-request failures answer {"error": "..."} and keep the loop alive.
 */

import { createInterface } from "node:readline";

import type { FeatureModel } from "./models.js";

export interface ServeOptions {
  model: FeatureModel;
  batchLimit: number;
  name?: string;
}

function send(obj: unknown): void {
  process.stdout.write(JSON.stringify(obj) + "\n");
}

interface CloudMessage {
  id?: unknown;
  points?: unknown;
}

export function serve(opts: ServeOptions): void {
  const name = opts.name ?? opts.model.name;
  const rl = createInterface({ input: process.stdin, terminal: false });

  rl.on("line", (line) => {
    const text = line.trim();
    if (!text) return;
    let msg: { op?: unknown; clouds?: unknown };
    try {
      msg = JSON.parse(text);
    } catch (err) {
      send({ error: `invalid JSON request: ${(err as Error).message}` });
      return;
    }
    switch (msg.op) {
      case "hello":
        send({ name, dim: opts.model.dim, batch_limit: opts.batchLimit });
        break;
      case "featurize": {
        const clouds = msg.clouds;
        if (!Array.isArray(clouds)) {
          send({ error: "featurize request needs a clouds array" });
          break;
        }
        if (clouds.length > opts.batchLimit) {
          send({ error: `batch of ${clouds.length} exceeds batch_limit ${opts.batchLimit}` });
          break;
        }
        try {
          const features = clouds.map((cloud: CloudMessage) => {
            const id = typeof cloud.id === "string" ? cloud.id : "";
            return { id: cloud.id, vector: opts.model.featurize(cloud.points, id) };
          });
          send({ features });
        } catch (err) {
          // inference failure on one batch must not kill the server
          send({ error: `featurize failed: ${(err as Error).message}` });
        }
        break;
      }
      case "shutdown":
        process.exit(0);
        break;
      default:
        send({ error: `unknown op ${JSON.stringify(msg.op)}` });
    }
  });

  // a closed stdin without a shutdown message is still a clean stop
  rl.on("close", () => process.exit(0));
}
