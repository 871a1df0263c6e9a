/**
 * Wire types for the phishpond HTTP service.
 *
 * Field names match the server's JSON exactly. Everything the play screen is
 * allowed to render comes from SessionState, which never carries a truth
 * label; truths and cues only appear in SessionSummary after the game ends.
 */

export type SessionStatus = 'in_progress' | 'completed' | 'out_of_lives' | 'out_of_time';

export type PlayerAction = 'eat' | 'avoid' | 'ask_teacher';

export type Truth = 'legit' | 'phish';

export interface WormState {
  index: number;
  total: number;
  url: string;
  helps_shown: number;
}

export interface SessionState {
  session_id: string;
  participant_id: string;
  status: SessionStatus;
  score: number;
  lives: number;
  time_remaining_s: number;
  next_seq: number;
  worm: WormState | null;
}

export interface ActionResult {
  action: PlayerAction;
  resolved: boolean;
  correct: boolean | null;
  tip: string | null;
}

export interface ActionResponse {
  result: ActionResult;
  state: SessionState;
}

export interface WormCue {
  rule_id: string;
  tip: string;
}

export interface WormReport {
  index: number;
  url: string;
  truth: Truth;
  action: 'eat' | 'avoid' | null;
  correct: boolean | null;
  helps_used: number;
  time_spent_s: number;
  cues: WormCue[];
  played: boolean;
}

export interface SessionSummary {
  session_id: string;
  participant_id: string;
  seed: number;
  status: SessionStatus;
  score: number;
  total_worms: number;
  resolved_count: number;
  accuracy_pct: number;
  helps_used: number;
  time_used_s: number;
  worms: WormReport[];
}

export interface ErrorBody {
  error: string;
  detail: string;
}
