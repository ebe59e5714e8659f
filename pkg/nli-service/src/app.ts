import express, { type Express, type NextFunction, type Request, type Response } from 'express';

import type { EntailmentModel } from './model.js';
import { entailRequestSchema, type EntailResponse, type HealthResponse } from './schema.js';

export interface AppOptions {
  /** Maximum accepted request body size, e.g. "1mb". */
  bodyLimit?: string;
  /** When set, requests must carry `Authorization: Bearer <token>`. */
  authToken?: string;
}

/**
 * Build the HTTP app around a model that may still be loading.
 *
 * Until the promise resolves, /health reports `loading` and /v1/entail
 * answers 503. Inference itself is synchronous per request, so responses
 * never interleave model state.
 */
export function createApp(modelPromise: Promise<EntailmentModel>, options: AppOptions = {}): Express {
  const app = express();
  app.use(express.json({ limit: options.bodyLimit ?? '1mb' }));

  let model: EntailmentModel | null = null;
  let loadError: Error | null = null;
  modelPromise.then(
    (m) => {
      model = m;
    },
    (err) => {
      loadError = err instanceof Error ? err : new Error(String(err));
    },
  );

  if (options.authToken) {
    const expected = `Bearer ${options.authToken}`;
    app.use((req: Request, res: Response, next: NextFunction) => {
      if (req.headers.authorization !== expected) {
        res.status(401).json({ error: 'missing or invalid token' });
        return;
      }
      next();
    });
  }

  app.get('/health', (_req: Request, res: Response) => {
    const body: HealthResponse = model
      ? { status: 'ok', model_id: model.modelId }
      : { status: 'loading' };
    res.status(model ? 200 : 503).json(body);
  });

  app.post('/v1/entail', (req: Request, res: Response) => {
    if (loadError) {
      res.status(500).json({ error: 'model failed to load' });
      return;
    }
    if (!model) {
      res.status(503).json({ error: 'model is still loading' });
      return;
    }
    const parsed = entailRequestSchema.safeParse(req.body);
    if (!parsed.success) {
      res.status(400).json({ error: parsed.error.issues.map((i) => i.message).join('; ') });
      return;
    }
    try {
      const verdict = model.judge(parsed.data.premise, parsed.data.hypothesis);
      const body: EntailResponse = {
        label: verdict.entails ? 'entailment' : 'not_entailment',
        score: verdict.score,
        model_id: model.modelId,
      };
      res.json(body);
    } catch {
      res.status(500).json({ error: 'inference failed' });
    }
  });

  // body-parser errors: oversize payloads become 413, bad JSON becomes 400
  app.use((err: Error & { type?: string; status?: number }, _req: Request, res: Response, next: NextFunction) => {
    if (res.headersSent) {
      next(err);
      return;
    }
    if (err.type === 'entity.too.large' || err.status === 413) {
      res.status(413).json({ error: 'payload too large' });
      return;
    }
    if (err.status && err.status < 500) {
      res.status(err.status).json({ error: 'invalid request body' });
      return;
    }
    res.status(500).json({ error: 'internal error' });
  });

  return app;
}
