import { z } from 'zod';

export const entailRequestSchema = z.object({
  premise: z.string().min(1, 'premise must be non-empty'),
  hypothesis: z.string().min(1, 'hypothesis must be non-empty'),
});

export type EntailRequest = z.infer<typeof entailRequestSchema>;

export const entailResponseSchema = z.object({
  label: z.enum(['entailment', 'not_entailment']),
  score: z.number().min(0).max(1),
  model_id: z.string(),
});

export type EntailResponse = z.infer<typeof entailResponseSchema>;

export const healthResponseSchema = z.object({
  status: z.enum(['ok', 'loading']),
  model_id: z.string().optional(),
});

export type HealthResponse = z.infer<typeof healthResponseSchema>;
