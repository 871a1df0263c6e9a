/**
 * Client-side game flow: one session, one action in flight at a time.
 *
 * The HUD countdown is display-only; after every acknowledged action the
 * server's time_remaining_s is adopted wholesale, so local drift never
 * accumulates. Per-action elapsed seconds are measured from the previous
 * acknowledgment (or from when the round started) using an injectable clock.
 */

import { ApiError, PondClient } from './api.js';
import type { PlayerAction, SessionState, SessionSummary } from './types.js';

export type Phase = 'idle' | 'playing' | 'finished' | 'error';

export interface Feedback {
  action: 'eat' | 'avoid';
  correct: boolean;
  url: string;
}

const MAX_ELAPSED_S = 3600;

export interface ControllerOptions {
  client: PondClient;
  participantId?: string;
  now?: () => number;
}

export class GameController {
  phase: Phase = 'idle';
  state: SessionState | null = null;
  summary: SessionSummary | null = null;
  /** Teacher tip for the current worm, cleared when the worm resolves. */
  tip: string | null = null;
  /** Outcome of the last resolved worm, shown until the next action. */
  feedback: Feedback | null = null;
  /** HUD countdown in seconds; display only, re-synced on every ack. */
  displayTimeS = 0;
  busy = false;
  lastError: string | null = null;

  private readonly client: PondClient;
  private readonly participantId: string | undefined;
  private readonly now: () => number;
  private anchorMs = 0;
  private readonly listeners: Array<() => void> = [];

  constructor(options: ControllerOptions) {
    this.client = options.client;
    this.participantId = options.participantId;
    this.now = options.now ?? (() => Date.now());
  }

  onChange(listener: () => void): () => void {
    this.listeners.push(listener);
    return () => {
      const at = this.listeners.indexOf(listener);
      if (at >= 0) this.listeners.splice(at, 1);
    };
  }

  private emit(): void {
    for (const listener of [...this.listeners]) listener();
  }

  /** Create a session and enter the playing phase. */
  async start(): Promise<void> {
    if (this.busy) return;
    this.busy = true;
    this.lastError = null;
    this.emit();
    try {
      const state = await this.client.createSession(this.participantId);
      this.state = state;
      this.summary = null;
      this.tip = null;
      this.feedback = null;
      this.displayTimeS = state.time_remaining_s;
      this.anchorMs = this.now();
      this.phase = 'playing';
    } catch (error) {
      this.phase = 'error';
      this.lastError = describe(error);
    } finally {
      this.busy = false;
      this.emit();
    }
  }

  eat(): Promise<void> {
    return this.act('eat');
  }

  avoid(): Promise<void> {
    return this.act('avoid');
  }

  askTeacher(): Promise<void> {
    return this.act('ask_teacher');
  }

  /** One display tick: count the HUD clock down, never below zero. */
  tick(): void {
    if (this.phase !== 'playing' || this.displayTimeS === 0) return;
    this.displayTimeS -= 1;
    this.emit();
  }

  reset(): void {
    if (this.busy) return;
    this.phase = 'idle';
    this.state = null;
    this.summary = null;
    this.tip = null;
    this.feedback = null;
    this.displayTimeS = 0;
    this.lastError = null;
    this.emit();
  }

  private elapsedS(): number {
    const seconds = Math.floor((this.now() - this.anchorMs) / 1000);
    return Math.min(MAX_ELAPSED_S, Math.max(0, seconds));
  }

  private async act(action: PlayerAction): Promise<void> {
    if (this.busy || this.phase !== 'playing' || this.state === null) return;
    this.busy = true;
    this.lastError = null;
    this.emit();
    const wormUrl = this.state.worm?.url ?? '';
    try {
      const response = await this.client.sendAction(
        this.state.session_id,
        action,
        this.state.next_seq,
        this.elapsedS()
      );
      this.adopt(response.state);
      if (response.result.resolved) {
        this.tip = null;
        this.feedback = {
          action: action as 'eat' | 'avoid',
          correct: response.result.correct === true,
          url: wormUrl,
        };
      } else if (response.result.tip !== null) {
        this.tip = response.result.tip;
      }
      if (response.state.status !== 'in_progress') {
        await this.finish(response.state.session_id);
      }
    } catch (error) {
      try {
        await this.recover(error);
      } catch (secondary) {
        this.lastError = describe(secondary);
      }
    } finally {
      this.busy = false;
      this.emit();
    }
  }

  /** Take the server's word for everything, including the clock. */
  private adopt(state: SessionState): void {
    this.state = state;
    this.displayTimeS = state.time_remaining_s;
    this.anchorMs = this.now();
  }

  private async finish(sessionId: string): Promise<void> {
    this.summary = await this.client.getSummary(sessionId);
    this.tip = null;
    this.phase = 'finished';
  }

  private async recover(error: unknown): Promise<void> {
    if (error instanceof ApiError && this.state !== null) {
      if (error.code === 'sequence_conflict') {
        // Another submission won the race; adopt the server's state and move on.
        this.adopt(await this.client.getSession(this.state.session_id));
        return;
      }
      if (error.code === 'session_finished') {
        await this.finish(this.state.session_id);
        return;
      }
    }
    this.lastError = describe(error);
  }
}

function describe(error: unknown): string {
  if (error instanceof ApiError) return error.message;
  if (error instanceof Error) return error.message;
  return String(error);
}
