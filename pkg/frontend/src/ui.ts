/**
 * DOM view for the pond. Renders the whole screen from controller state on
 * every change; no virtual DOM, no framework.
 *
 * Layout rule the tests pin down: while a worm is on screen the play screen
 * never shows a truth label, and the teacher's tip is rendered as the
 * immediate sibling below the URL.
 */

import type { GameController } from './game.js';
import type { SessionStatus, WormReport } from './types.js';

const HELP_COST_LABEL = 'costs 100 s';

const STATUS_HEADINGS: Record<SessionStatus, string> = {
  in_progress: 'Still swimming',
  completed: 'Round complete!',
  out_of_lives: 'Out of lives!',
  out_of_time: 'Out of time!',
};

export function formatTime(totalSeconds: number): string {
  const minutes = Math.floor(totalSeconds / 60);
  const seconds = totalSeconds % 60;
  return `${minutes}:${String(seconds).padStart(2, '0')}`;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export class PondView {
  constructor(
    private readonly root: HTMLElement,
    private readonly controller: GameController
  ) {
    controller.onChange(() => this.render());
    this.render();
  }

  render(): void {
    this.root.textContent = '';
    switch (this.controller.phase) {
      case 'idle':
        this.root.appendChild(this.renderStart());
        break;
      case 'playing':
        this.root.appendChild(this.renderPlay());
        break;
      case 'finished':
        this.root.appendChild(this.renderSummary());
        break;
      case 'error':
        this.root.appendChild(this.renderError());
        break;
    }
  }

  private renderStart(): HTMLElement {
    const screen = el('div', 'start-screen');
    screen.appendChild(el('h2', undefined, 'Welcome to the pond'));
    const rules = el('ul', 'how-to');
    for (const line of [
      'You are a hungry fish. Worms drift by, each carrying a website address.',
      'Eat the worm if its address looks safe. Avoid it if the address looks suspicious.',
      `Stuck? Ask the teacher fish for a hint. It ${HELP_COST_LABEL}.`,
      'You have 5 lives and 600 seconds. Each correct call scores a point.',
    ]) {
      rules.appendChild(el('li', undefined, line));
    }
    screen.appendChild(rules);
    const start = el('button', 'primary', 'Dive in');
    start.id = 'start-btn';
    start.disabled = this.controller.busy;
    start.addEventListener('click', () => void this.controller.start());
    screen.appendChild(start);
    return screen;
  }

  private renderPlay(): HTMLElement {
    const { state, tip, feedback, busy, lastError, displayTimeS } = this.controller;
    const screen = el('div', 'play-screen');
    if (state === null) return screen;

    const hud = el('div', 'hud');
    hud.appendChild(el('span', 'lives', '♥'.repeat(Math.max(0, state.lives))));
    hud.appendChild(el('span', 'time', formatTime(displayTimeS)));
    hud.appendChild(el('span', 'score', `${state.score} pt`));
    if (state.worm !== null) {
      hud.appendChild(el('span', 'progress', `worm ${state.worm.index + 1} / ${state.worm.total}`));
    }
    screen.appendChild(hud);

    if (feedback !== null) {
      const note = el(
        'p',
        feedback.correct ? 'feedback good' : 'feedback bad',
        feedback.correct ? 'Correct! +1 point.' : 'Wrong! That cost you a life.'
      );
      screen.appendChild(note);
    }

    if (state.worm !== null) {
      const card = el('div', 'worm-card');
      const worm = el('button', 'worm', '\u{1FAB1} Eat');
      worm.id = 'eat-btn';
      worm.disabled = busy;
      worm.addEventListener('click', () => void this.controller.eat());
      card.appendChild(worm);

      const url = el('code', 'worm-url', state.worm.url);
      card.appendChild(url);
      if (tip !== null) {
        // The tip sits directly below the URL it explains.
        card.appendChild(el('p', 'tip', tip));
      }

      const actions = el('div', 'actions');
      const avoid = el('button', undefined, 'Avoid');
      avoid.id = 'avoid-btn';
      avoid.disabled = busy;
      avoid.addEventListener('click', () => void this.controller.avoid());
      actions.appendChild(avoid);
      const teacher = el('button', 'teacher', `\u{1F420} Ask the teacher (${HELP_COST_LABEL})`);
      teacher.id = 'teacher-btn';
      teacher.disabled = busy;
      teacher.addEventListener('click', () => void this.controller.askTeacher());
      actions.appendChild(teacher);
      card.appendChild(actions);
      screen.appendChild(card);
    }

    if (lastError !== null) {
      screen.appendChild(el('p', 'error-note', lastError));
    }
    return screen;
  }

  private renderSummary(): HTMLElement {
    const { summary } = this.controller;
    const screen = el('div', 'summary-screen');
    if (summary === null) return screen;

    screen.appendChild(el('h2', undefined, STATUS_HEADINGS[summary.status]));
    const stats = el('p', 'stats');
    stats.textContent =
      `Score ${summary.score} / ${summary.total_worms}` +
      ` | accuracy ${summary.accuracy_pct.toFixed(1)}%` +
      ` | ${summary.helps_used} hints | ${summary.time_used_s} s used`;
    screen.appendChild(stats);

    const table = el('table', 'worm-table');
    const head = el('tr');
    for (const label of ['address', 'truth', 'your call', 'result', 'what gave it away']) {
      head.appendChild(el('th', undefined, label));
    }
    table.appendChild(head);
    for (const worm of summary.worms) {
      table.appendChild(this.renderWormRow(worm));
    }
    screen.appendChild(table);

    screen.appendChild(el('p', 'seed-note', `round seed: ${summary.seed}`));
    const again = el('button', 'primary', 'Play again');
    again.id = 'again-btn';
    again.addEventListener('click', () => this.controller.reset());
    screen.appendChild(again);
    return screen;
  }

  private renderWormRow(worm: WormReport): HTMLElement {
    const row = el('tr', worm.correct === false ? 'missed' : undefined);
    row.appendChild(el('td', 'url', worm.url));
    row.appendChild(el('td', `truth ${worm.truth}`, worm.truth));
    row.appendChild(el('td', undefined, worm.played && worm.action !== null ? worm.action : 'not played'));
    let result = '';
    if (worm.correct === true) result = '✓';
    if (worm.correct === false) result = '✗';
    row.appendChild(el('td', undefined, result));
    const cues = el('td', 'cues');
    for (const cue of worm.cues) {
      cues.appendChild(el('div', 'cue', cue.tip));
    }
    row.appendChild(cues);
    return row;
  }

  private renderError(): HTMLElement {
    const screen = el('div', 'error-screen');
    screen.appendChild(el('h2', undefined, 'The pond is unreachable'));
    screen.appendChild(el('p', 'error-note', this.controller.lastError ?? 'unknown error'));
    const retry = el('button', 'primary', 'Try again');
    retry.id = 'retry-btn';
    retry.addEventListener('click', () => this.controller.reset());
    screen.appendChild(retry);
    return screen;
  }
}
