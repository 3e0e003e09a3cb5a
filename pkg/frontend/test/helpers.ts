// Shared test plumbing: load the schema file from the repository and spawn
// a real service process for passthrough tests.

import { spawn, type ChildProcess } from "node:child_process";
import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

export const REPO_ROOT = join(dirname(fileURLToPath(import.meta.url)), "..", "..");

export function loadSchemaDoc(): unknown {
  return JSON.parse(readFileSync(join(REPO_ROOT, "schemas", "game_state.schema.json"), "utf8"));
}

// Train a small deterministic model in-process and serve it on an ephemeral
// port; the child prints the bound port on its first stdout line.
const BOOT_SCRIPT = `
from winprob import (TrainConfig, featurize_matrix, fit_standardizer,
                     gen_glm_dataset, standardize_matrix, train_glm)
from winprob.service import make_server

w = [0.3, 0.12, 0.05, -0.05, 0.0002, 0.2, 0.05, 0.1, 0.04, -0.06, -0.15,
     0.003, -0.012, 0.08, 0.04, -0.04, -0.1, 0.004, -0.015, 0.03, 0.04]
ds = gen_glm_dataset(w, 0.0, 6000, seed=99)
x = featurize_matrix(ds.states())
stats = fit_standardizer(x)
model = train_glm(standardize_matrix(x, stats), ds.labels(), TrainConfig(seed=99), stats)
server = make_server(model, port=0)
print("PORT", server.server_address[1], flush=True)
server.serve_forever()
`;

export interface RunningService {
  url: string;
  stop(): void;
}

export async function startService(): Promise<RunningService> {
  const child: ChildProcess = spawn("python3", ["-c", BOOT_SCRIPT], {
    cwd: REPO_ROOT,
    stdio: ["ignore", "pipe", "pipe"],
  });
  let stderr = "";
  child.stderr!.on("data", (chunk: Buffer) => {
    stderr += chunk.toString();
  });

  const port = await new Promise<number>((resolve, reject) => {
    const timer = setTimeout(
      () => reject(new Error(`service did not start in time\n${stderr}`)),
      90_000,
    );
    let buffer = "";
    child.stdout!.on("data", (chunk: Buffer) => {
      buffer += chunk.toString();
      const match = buffer.match(/PORT (\d+)/);
      if (match) {
        clearTimeout(timer);
        resolve(Number(match[1]));
      }
    });
    child.on("exit", (code) => {
      clearTimeout(timer);
      reject(new Error(`service exited with ${code} before binding\n${stderr}`));
    });
  });

  const url = `http://127.0.0.1:${port}`;
  for (let attempt = 0; ; attempt++) {
    try {
      const resp = await fetch(`${url}/v1/health`);
      if (resp.ok) {
        break;
      }
    } catch {
      // not up yet
    }
    if (attempt > 100) {
      child.kill();
      throw new Error(`service never became healthy\n${stderr}`);
    }
    await new Promise((r) => setTimeout(r, 100));
  }

  return { url, stop: () => void child.kill() };
}
