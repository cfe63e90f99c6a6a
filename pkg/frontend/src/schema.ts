// Client-side mirror of the server's siting request contract. The server
// re-validates everything; this exists so bad forms fail inline without a
// round trip, and the fixture test proves both sides accept the same
// bodies.

import { z } from 'zod';

import type { SitingForm } from './types';

export const sitingFormSchema = z
  .object({
    weights: z
      .object({
        w1: z.number().min(0),
        w2: z.number().min(0),
        w3: z.number().min(0),
      })
      .refine((w) => w.w1 > 0 || w.w2 > 0 || w.w3 > 0, {
        message: 'at least one weight must be positive',
      }),
    stations: z.number().int().min(1),
    chargers: z.tuple([z.number().int().min(1), z.number().int().min(1)]),
    children: z.number().int().min(1),
    iterations: z.number().int().min(1),
    seed: z.number().int(),
  })
  .refine((form) => form.chargers[0] <= form.chargers[1], {
    message: 'charger range is inverted',
  });

export function validateSitingForm(
  form: SitingForm,
): { ok: true; value: SitingForm } | { ok: false; message: string } {
  const parsed = sitingFormSchema.safeParse(form);
  if (parsed.success) {
    return { ok: true, value: parsed.data as SitingForm };
  }
  const issue = parsed.error.issues[0];
  return { ok: false, message: issue ? issue.message : 'invalid form' };
}
