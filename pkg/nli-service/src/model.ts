import { readFile } from 'node:fs/promises';
import { basename } from 'node:path';

/** A binary entailment decision with a confidence in [0, 1]. */
export interface Verdict {
  entails: boolean;
  score: number;
}

/**
 * A served entailment model. Decisions must be deterministic for a fixed
 * model instance; `modelId` names the behavior for client-side caching.
 */
export interface EntailmentModel {
  readonly modelId: string;
  judge(premise: string, hypothesis: string): Verdict;
}

function tokens(text: string): string[] {
  return text.toLowerCase().match(/[\p{L}\p{N}_]+/gu) ?? [];
}

/**
 * Deterministic lexical-overlap model: the premise entails the hypothesis
 * iff every hypothesis token of length >= 4 occurs in the premise. The
 * score is the covered fraction of those required tokens.
 *
 * This is a desk-scale stand-in, not real NLI; swap in a transformer-backed
 * model via the same interface when one is available.
 */
export class LexicalModel implements EntailmentModel {
  readonly modelId = 'lexical-overlap-v1';

  judge(premise: string, hypothesis: string): Verdict {
    const premiseTokens = new Set(tokens(premise));
    const required = tokens(hypothesis).filter((t) => t.length >= 4);
    if (required.length === 0) {
      return { entails: true, score: 1 };
    }
    const covered = required.filter((t) => premiseTokens.has(t)).length;
    const score = covered / required.length;
    return { entails: covered === required.length, score };
  }
}

interface TableRow {
  premise: string;
  hypothesis: string;
  entails: boolean;
}

/** Fixed lookup table; unknown pairs are not_entailment. */
export class TableModel implements EntailmentModel {
  readonly modelId: string;
  private readonly entries = new Map<string, boolean>();

  constructor(rows: TableRow[], name: string) {
    this.modelId = `table:${name}`;
    for (const row of rows) {
      this.entries.set(TableModel.key(row.premise, row.hypothesis), Boolean(row.entails));
    }
  }

  private static key(premise: string, hypothesis: string): string {
    return `${premise.length}:${premise}|${hypothesis}`;
  }

  judge(premise: string, hypothesis: string): Verdict {
    const entails = this.entries.get(TableModel.key(premise, hypothesis)) ?? false;
    return { entails, score: entails ? 1 : 0 };
  }
}

export async function loadTableModel(path: string): Promise<TableModel> {
  const raw = await readFile(path, 'utf-8');
  const rows = JSON.parse(raw);
  if (!Array.isArray(rows)) {
    throw new Error(`table file ${path} must hold a JSON array`);
  }
  return new TableModel(rows as TableRow[], basename(path));
}

/**
 * Resolve a model spec from the startup flag: `lexical` (default) or
 * `table:<path>`.
 */
export async function loadModel(spec: string): Promise<EntailmentModel> {
  if (spec === 'lexical') {
    return new LexicalModel();
  }
  if (spec.startsWith('table:')) {
    return loadTableModel(spec.slice('table:'.length));
  }
  throw new Error(`unknown model spec '${spec}' (expected 'lexical' or 'table:<path>')`);
}
