/** Batch entry point: `node dist/render.js --spec figures.json`.

The spec file holds one figure spec or an array of them; each renders to its
own SVG.  Inputs are never modified; reruns are byte-identical.
*/

import { readFileSync, writeFileSync, mkdirSync } from "node:fs";
import { dirname } from "node:path";
import { z } from "zod";
import { ArtifactError } from "./artifacts.js";
import { FigureSpec, renderFigure } from "./figures.js";

const figureSpecSchema = z.object({
  kind: z.string(),
  inputs: z.record(z.string()),
  output: z.string(),
  title: z.string().optional(),
});

const specFileSchema = z.union([figureSpecSchema, z.array(figureSpecSchema)]);

export function loadSpecs(path: string): FigureSpec[] {
  let text: string;
  try {
    text = readFileSync(path, "utf-8");
  } catch {
    throw new ArtifactError(`figure spec not found: ${path}`);
  }
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch (err) {
    throw new ArtifactError(`figure spec is not valid JSON: ${(err as Error).message}`);
  }
  const parsed = specFileSchema.safeParse(raw);
  if (!parsed.success) {
    const issue = parsed.error.issues[0];
    throw new ArtifactError(
      `figure spec invalid at ${issue.path.join(".") || "(root)"}: ${issue.message}`,
    );
  }
  const specs = Array.isArray(parsed.data) ? parsed.data : [parsed.data];
  return specs;
}

export function renderSpecFile(path: string): string[] {
  const outputs: string[] = [];
  for (const spec of loadSpecs(path)) {
    const svg = renderFigure(spec);
    mkdirSync(dirname(spec.output), { recursive: true });
    writeFileSync(spec.output, svg, "utf-8");
    outputs.push(spec.output);
  }
  return outputs;
}

function main(argv: string[]): number {
  const idx = argv.indexOf("--spec");
  if (idx < 0 || idx + 1 >= argv.length) {
    console.error("usage: render --spec PATH");
    return 1;
  }
  try {
    const written = renderSpecFile(argv[idx + 1]);
    for (const out of written) console.log(out);
  } catch (err) {
    if (err instanceof ArtifactError) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    throw err;
  }
  return 0;
}

if (process.argv[1] && process.argv[1].endsWith("render.js")) {
  process.exit(main(process.argv.slice(2)));
}
