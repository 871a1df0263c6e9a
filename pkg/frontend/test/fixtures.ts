/**
 * Shared test fixtures: a fixed four-worm script that exercises both truths,
 * both outcomes, and the teacher, plus a tiny waitFor for DOM-driven tests.
 */

import type { StubWorm } from './stub_server.js';

export const NUMERIC_TIP = 'website addresses associate with numbers in the front are generally scams';
export const HYPHEN_TIP = 'a company name followed by a hyphen in a URL is generally a scam';

export const SCRIPT: StubWorm[] = [
  { url: 'https://www.store.example/catalog', truth: 'legit', cues: [] },
  {
    url: 'http://192.0.2.7/login',
    truth: 'phish',
    cues: [{ rule_id: 'R1_NUMERIC_HOST', tip: NUMERIC_TIP }],
  },
  {
    url: 'http://paypal-secure.example.net/verify',
    truth: 'phish',
    cues: [{ rule_id: 'R2_BRAND_HYPHEN', tip: HYPHEN_TIP }],
  },
  { url: 'https://mail.example.org/inbox', truth: 'legit', cues: [] },
];

export async function waitFor(check: () => boolean, timeoutMs = 2000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (!check()) {
    if (Date.now() > deadline) throw new Error('waitFor timed out');
    await new Promise((resolve) => setTimeout(resolve, 5));
  }
}
