import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

const fixtureDir = join(
  dirname(fileURLToPath(import.meta.url)),
  "fixtures",
);

export function fixture(name: string): unknown {
  return JSON.parse(readFileSync(join(fixtureDir, name), "utf-8"));
}
