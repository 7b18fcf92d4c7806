/** Readers for the laboratory's CSV/JSON artifacts with named-field errors. */

import { readFileSync } from "node:fs";
import Papa from "papaparse";
import { z } from "zod";

export class ArtifactError extends Error {}

function readText(path: string): string {
  try {
    return readFileSync(path, "utf-8");
  } catch {
    throw new ArtifactError(`input artifact not found or unreadable: ${path}`);
  }
}

export interface Table {
  columns: string[];
  rows: Record<string, number | string>[];
}

/** Parse a CSV artifact and demand the named columns (error names the first missing one). */
export function readCsv(path: string, required: string[]): Table {
  const text = readText(path);
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    throw new ArtifactError(`CSV parse error in ${path}: ${parsed.errors[0].message}`);
  }
  const columns = parsed.meta.fields ?? [];
  for (const col of required) {
    if (!columns.includes(col)) {
      throw new ArtifactError(`artifact ${path} is missing required column "${col}"`);
    }
  }
  const rows = parsed.data.map((raw) => {
    const row: Record<string, number | string> = {};
    for (const col of columns) {
      const value = raw[col];
      const num = Number(value);
      row[col] = value !== "" && Number.isFinite(num) ? num : value;
    }
    return row;
  });
  return { columns, rows };
}

export function column(table: Table, name: string): number[] {
  return table.rows.map((r) => {
    const v = r[name];
    if (typeof v !== "number") {
      throw new ArtifactError(`column "${name}" contains a non-numeric entry: ${String(v)}`);
    }
    return v;
  });
}

export function readJson<T>(path: string, schema: z.ZodType<T>, label: string): T {
  const text = readText(path);
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch (err) {
    throw new ArtifactError(`artifact ${path} is not valid JSON: ${(err as Error).message}`);
  }
  const result = schema.safeParse(raw);
  if (!result.success) {
    const issue = result.error.issues[0];
    const where = issue.path.join(".") || "(root)";
    throw new ArtifactError(`artifact ${path} does not match the ${label} schema at ${where}: ${issue.message}`);
  }
  return result.data;
}

const pairTable = z.array(z.tuple([z.number(), z.number()]));

export const lstarSchema = z.object({
  alpha: z.number(),
  theta: z.number(),
  c: z.number(),
  lambda_L_table: pairTable,
  L_star_eigen: z.number(),
  L_star_dynamic: z.number(),
  bisection_tol: z.number(),
});
export type LstarSummary = z.infer<typeof lstarSchema>;

export const symmetrySchema = z.object({
  c: z.number(),
  left_exponent: z.number(),
  right_exponent: z.number(),
  left_predicted: z.number(),
  right_predicted: z.number(),
  verdict: z.enum(["Asymmetric", "PossiblySymmetric"]),
});
export type SymmetrySummary = z.infer<typeof symmetrySchema>;

export const sweepSchema = z.object({
  lambda0: z.number(),
  c_star: z.number().nullable(),
});
export type SweepSummary = z.infer<typeof sweepSchema>;

export const concentrationSchema = z.object({
  lambda_d: z.number(),
  final_distance: z.number().nullable(),
  n_max: z.number(),
});
export type ConcentrationSummary = z.infer<typeof concentrationSchema>;
