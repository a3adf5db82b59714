/**
 * Juror flow: log in with the study access code, then judge one result
 * per screen in the server's presentation order.
 *
 * What a juror never sees: which engine produced a result, its rank, or
 * its URL -- only the query, the archived page itself, and the judgment
 * controls. Binary and graded judgments are independently optional;
 * skipping is always possible. A submission that fails on the network is
 * kept and can be retried without losing the selection.
 */

import { ApiError, BinaryJudgment, JudgmentSubmission, StudyApi, TaskPayload } from './api.js';
import { clear, el } from './dom.js';
import { createSnapshotFrame, createUnavailableNotice } from './sandbox.js';

const SESSION_KEY = 'serpeval-session';

export const GRADE_LABELS = [
  '0 – completely irrelevant',
  '1',
  '2',
  '3',
  '4 – completely relevant',
];

interface Selection {
  binary: BinaryJudgment | null;
  graded: number | null;
}

export class JurorApp {
  private sessionId: string | null = null;
  private task: TaskPayload | null = null;
  private selection: Selection = { binary: null, graded: null };
  private pendingRetry: JudgmentSubmission | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: StudyApi,
    private readonly storage: Storage = window.localStorage,
  ) {}

  async start(): Promise<void> {
    this.sessionId = this.storage.getItem(SESSION_KEY);
    if (this.sessionId) {
      try {
        await this.loadTask();
        return;
      } catch (error) {
        if (error instanceof ApiError && error.status === 403) {
          this.storage.removeItem(SESSION_KEY); // stale session
          this.sessionId = null;
        } else {
          throw error;
        }
      }
    }
    this.renderLogin();
  }

  // -- login ------------------------------------------------------------

  private renderLogin(errorText = ''): void {
    clear(this.root);
    const input = el('input', {
      type: 'password',
      id: 'access-code',
      placeholder: 'access code',
      autocomplete: 'off',
    });
    const error = el('p', { class: 'error', id: 'login-error' }, [errorText]);
    const submit = el(
      'button',
      { id: 'login-button', onclick: () => void this.login(input.value) },
      ['Start judging'],
    );
    this.root.append(
      el('section', { class: 'login' }, [
        el('h1', {}, ['Relevance study']),
        el('p', {}, [
          'Enter the access code you received to start judging search results.',
        ]),
        input,
        submit,
        error,
      ]),
    );
  }

  private async login(accessCode: string): Promise<void> {
    try {
      this.sessionId = await this.api.openSession(accessCode);
    } catch (error) {
      if (error instanceof ApiError && error.status === 403) {
        this.renderLogin('Invalid code.');
        return;
      }
      this.renderLogin('Could not reach the study server. Try again.');
      return;
    }
    this.storage.setItem(SESSION_KEY, this.sessionId);
    await this.loadTask();
  }

  // -- task flow -----------------------------------------------------------

  private async loadTask(): Promise<void> {
    if (!this.sessionId) throw new Error('no session');
    this.task = await this.api.getTask(this.sessionId);
    this.selection = { binary: null, graded: null };
    this.pendingRetry = null;
    if (this.task === null) {
      this.renderAllDone();
      return;
    }
    const current = this.currentResult();
    if (current === null) {
      this.renderBelowThreshold();
      return;
    }
    this.renderResult();
  }

  /** Forced ordering: the first result not yet visited, never backwards. */
  private currentResult() {
    if (!this.task) return null;
    return this.task.results.find((result) => !result.judged) ?? null;
  }

  private renderResult(noticeText = ''): void {
    const task = this.task;
    const result = this.currentResult();
    if (!task || !result) return;
    clear(this.root);

    const visited = task.results.filter((r) => r.judged).length;
    const header = el('header', {}, [
      el('h1', {}, ['How well does this page answer the search query?']),
      el('p', { class: 'query' }, [
        'Query: ',
        el('strong', { id: 'query-text' }, [task.query]),
      ]),
      el('p', { class: 'progress', id: 'progress' }, [
        `Result ${visited + 1} of ${task.results.length}`,
      ]),
    ]);

    const view = el('div', { class: 'result-view', id: 'result-view' });
    if (result.available && result.snapshot_id) {
      view.append(createSnapshotFrame(this.api.snapshotUrl(result.snapshot_id)));
    } else {
      view.append(createUnavailableNotice());
    }

    const binaryRow = el('div', { class: 'controls binary', role: 'group' });
    (['relevant', 'not-relevant'] as BinaryJudgment[]).forEach((value) => {
      binaryRow.append(
        el(
          'button',
          {
            class: this.selection.binary === value ? 'toggle selected' : 'toggle',
            'data-binary': value,
            onclick: () => {
              this.selection.binary = this.selection.binary === value ? null : value;
              this.renderResult();
            },
          },
          [value === 'relevant' ? 'Relevant' : 'Not relevant'],
        ),
      );
    });

    const gradeRow = el('div', { class: 'controls graded', role: 'group' });
    GRADE_LABELS.forEach((label, grade) => {
      gradeRow.append(
        el(
          'button',
          {
            class: this.selection.graded === grade ? 'toggle selected' : 'toggle',
            'data-grade': String(grade),
            onclick: () => {
              this.selection.graded = this.selection.graded === grade ? null : grade;
              this.renderResult();
            },
          },
          [label],
        ),
      );
    });

    const canSubmit = this.selection.binary !== null || this.selection.graded !== null;
    const actions = el('div', { class: 'actions' }, [
      el(
        'button',
        {
          id: 'submit-judgment',
          disabled: !canSubmit,
          onclick: () => void this.submit({ pooled_id: result.pooled_id, ...this.cleanSelection() }),
        },
        ['Submit judgment'],
      ),
      el(
        'button',
        {
          id: 'skip-result',
          class: 'secondary',
          onclick: () => void this.submit({ pooled_id: result.pooled_id, skipped: true }),
        },
        ['Skip this result'],
      ),
    ]);

    const notice = el('p', { class: 'notice', id: 'flow-notice' }, [noticeText]);
    this.root.append(header, view, binaryRow, gradeRow, actions, notice);
  }

  private cleanSelection(): Partial<JudgmentSubmission> {
    const out: Partial<JudgmentSubmission> = {};
    if (this.selection.binary !== null) out.binary = this.selection.binary;
    if (this.selection.graded !== null) out.graded = this.selection.graded;
    return out;
  }

  private validate(submission: JudgmentSubmission): string | null {
    if (submission.skipped && (submission.binary || submission.graded !== undefined)) {
      return 'A skipped result cannot carry judgments.';
    }
    if (!submission.skipped && !submission.binary && submission.graded === undefined) {
      return 'Choose a judgment or skip.';
    }
    if (
      submission.graded !== undefined &&
      (!Number.isInteger(submission.graded) || submission.graded < 0 || submission.graded > 4)
    ) {
      return 'Grades range from 0 to 4.';
    }
    return null;
  }

  private async submit(submission: JudgmentSubmission): Promise<void> {
    if (!this.sessionId) return;
    const problem = this.validate(submission);
    if (problem) {
      this.renderResult(problem);
      return;
    }
    try {
      const ack = await this.api.submitJudgment(this.sessionId, submission);
      this.pendingRetry = null;
      this.selection = { binary: null, graded: null };
      if (ack.complete) {
        this.renderTaskComplete(ack.voucher_issued);
        return;
      }
      await this.refreshTask();
    } catch (error) {
      if (error instanceof ApiError) {
        // rejected by the server (validation, lease): surface and move on
        this.renderResult(`The server rejected this judgment: ${error.detail}`);
        return;
      }
      // network failure: keep the unsent judgment for retry
      this.pendingRetry = submission;
      this.renderRetry();
    }
  }

  private async refreshTask(): Promise<void> {
    if (!this.sessionId) return;
    this.task = await this.api.getTask(this.sessionId);
    if (this.task === null) {
      this.renderAllDone();
      return;
    }
    if (this.currentResult() === null) {
      this.renderBelowThreshold();
      return;
    }
    this.renderResult();
  }

  private renderRetry(): void {
    clear(this.root);
    this.root.append(
      el('section', { class: 'retry' }, [
        el('h1', {}, ['Connection lost']),
        el('p', {}, ['Your judgment was not sent. It is kept and can be retried.']),
        el(
          'button',
          {
            id: 'retry-submit',
            onclick: () => {
              const pending = this.pendingRetry;
              if (pending) void this.submit(pending);
            },
          },
          ['Retry'],
        ),
      ]),
    );
  }

  private renderTaskComplete(voucherIssued: boolean): void {
    clear(this.root);
    const section = el('section', { class: 'complete', id: 'task-complete' }, [
      el('h1', {}, ['Task complete - thank you!']),
    ]);
    if (voucherIssued) {
      section.append(
        el('p', { class: 'voucher', id: 'voucher-notice' }, [
          'A voucher for this task is on its way to you.',
        ]),
      );
    }
    section.append(
      el(
        'button',
        { id: 'next-task', onclick: () => void this.loadTask() },
        ['Start the next task'],
      ),
    );
    this.root.append(section);
  }

  private renderBelowThreshold(): void {
    clear(this.root);
    this.root.append(
      el('section', { class: 'incomplete', id: 'task-incomplete' }, [
        el('h1', {}, ['All results visited']),
        el('p', {}, [
          'This task has not reached the completion threshold because too few ' +
            'results were graded. You can leave it as is, or it will be offered ' +
            'to another juror later.',
        ]),
        el(
          'button',
          { id: 'next-task', onclick: () => void this.loadTask() },
          ['Check for other tasks'],
        ),
      ]),
    );
  }

  private renderAllDone(): void {
    clear(this.root);
    this.root.append(
      el('section', { class: 'all-done', id: 'all-done' }, [
        el('h1', {}, ['No tasks remaining']),
        el('p', {}, ['Every available task has been judged. Thank you for participating!']),
      ]),
    );
  }
}

export function mountJurorApp(root: HTMLElement, baseUrl: string): JurorApp {
  const app = new JurorApp(root, new StudyApi(baseUrl));
  void app.start();
  return app;
}
