/**
 * Admin dashboard: live study monitoring plus the single-assessor
 * navigational verdict screen.
 *
 * The verdict screen shows first results with no engine identity -- the
 * assessor decides "is this the page the query asks for?" and the backend
 * maps the verdict to its engine.
 */

import { PendingVerdict, StudyApi, StudyProgress } from './api.js';
import { clear, el } from './dom.js';
import { createSnapshotFrame, createUnavailableNotice } from './sandbox.js';

export class AdminApp {
  private token = '';

  constructor(
    private readonly root: HTMLElement,
    private readonly api: StudyApi,
    private readonly runId: string,
    private readonly assessor = 'admin',
  ) {}

  async start(): Promise<void> {
    this.renderLogin();
  }

  private renderLogin(errorText = ''): void {
    clear(this.root);
    const input = el('input', { type: 'password', id: 'admin-token', placeholder: 'admin token' });
    this.root.append(
      el('section', { class: 'login' }, [
        el('h1', {}, ['Study administration']),
        input,
        el(
          'button',
          {
            id: 'admin-login',
            onclick: () => {
              this.token = input.value;
              void this.renderDashboard();
            },
          },
          ['Open dashboard'],
        ),
        el('p', { class: 'error', id: 'admin-error' }, [errorText]),
      ]),
    );
  }

  async renderDashboard(): Promise<void> {
    let progress: StudyProgress;
    try {
      progress = await this.api.studyProgress(this.runId, this.token);
    } catch {
      this.renderLogin('Not authorized.');
      return;
    }
    const vouchers = await this.api.pendingVouchers(this.token);

    clear(this.root);
    const collection = progress.collection;
    const summary = el('section', { class: 'summary', id: 'summary' }, [
      el('h1', {}, [`Study ${progress.study_id}`]),
      el('ul', {}, [
        el('li', { id: 'stat-tasks' }, [
          `Tasks complete: ${progress.complete_tasks} / ${progress.tasks.length}`,
        ]),
        el('li', { id: 'stat-vouchers' }, [`Voucher events: ${vouchers.length}`]),
        el('li', { id: 'stat-pending-nav' }, [
          `Navigational verdicts pending: ${progress.pending_navigational}`,
        ]),
        el('li', { id: 'stat-collection' }, [
          `Collection: ${collection.succeeded} ok, ${collection.failed} failed, ` +
            `${collection.unresolved_urls} unresolved URLs` +
            (collection.degraded ? ' (degraded)' : ''),
        ]),
      ]),
    ]);

    const taskRows = progress.tasks.map((task) =>
      el('tr', {}, [
        el('td', {}, [task.query]),
        el('td', {}, [task.status]),
        el('td', {}, [
          task.completion === null ? 'n/a' : `${Math.round(task.completion * 100)}%`,
        ]),
        el('td', {}, [
          `${task.progress.visited}/${task.progress.total} visited, ` +
            `${task.progress.graded}/${task.progress.judgeable} graded`,
        ]),
      ]),
    );
    const taskTable = el('section', { class: 'tasks' }, [
      el('h2', {}, ['Judgment tasks']),
      el('table', { id: 'task-table' }, [
        el('thead', {}, [
          el('tr', {}, [
            el('th', {}, ['query']),
            el('th', {}, ['status']),
            el('th', {}, ['completion']),
            el('th', {}, ['progress']),
          ]),
        ]),
        el('tbody', {}, taskRows),
      ]),
    ]);

    const throughputRows = Object.entries(progress.session_throughput).map(
      ([session, count]) =>
        el('tr', {}, [el('td', {}, [session]), el('td', {}, [String(count)])]),
    );
    const throughput = el('section', { class: 'throughput' }, [
      el('h2', {}, ['Juror throughput']),
      el('table', { id: 'throughput-table' }, [
        el('tbody', {}, throughputRows),
      ]),
    ]);

    const actions = el('section', {}, [
      el(
        'button',
        { id: 'open-verdicts', onclick: () => void this.renderVerdictScreen() },
        ['Judge navigational results'],
      ),
      el(
        'button',
        { id: 'refresh', class: 'secondary', onclick: () => void this.renderDashboard() },
        ['Refresh'],
      ),
    ]);

    this.root.append(summary, taskTable, throughput, actions);
  }

  async renderVerdictScreen(): Promise<void> {
    const pending = await this.api.pendingVerdicts(this.token);
    if (pending.length === 0) {
      clear(this.root);
      this.root.append(
        el('section', { id: 'verdicts-done' }, [
          el('h1', {}, ['No navigational results awaiting a verdict']),
          el(
            'button',
            { id: 'back', onclick: () => void this.renderDashboard() },
            ['Back to dashboard'],
          ),
        ]),
      );
      return;
    }
    this.renderVerdict(pending[0], pending.length);
  }

  private renderVerdict(item: PendingVerdict, remaining: number): void {
    clear(this.root);
    const view = el('div', { class: 'result-view', id: 'verdict-view' });
    if (item.snapshot_id) {
      view.append(createSnapshotFrame(this.api.snapshotUrl(item.snapshot_id)));
    } else {
      view.append(createUnavailableNotice());
    }
    const decide = (correct: boolean) => async () => {
      await this.api.postVerdict(this.token, item.verdict_id, correct, this.assessor);
      await this.renderVerdictScreen();
    };
    this.root.append(
      el('section', { class: 'verdict', id: 'verdict-screen' }, [
        el('h1', {}, ['Is this the page the query asks for?']),
        el('p', {}, ['Query: ', el('strong', { id: 'verdict-query' }, [item.query])]),
        el('p', { class: 'url' }, ['First result: ', el('code', {}, [item.url])]),
        view,
        el('div', { class: 'actions' }, [
          el('button', { id: 'verdict-correct', onclick: decide(true) }, ['Correct page']),
          el(
            'button',
            { id: 'verdict-incorrect', class: 'secondary', onclick: decide(false) },
            ['Wrong page'],
          ),
        ]),
        el('p', { class: 'notice' }, [`${remaining} result(s) left to judge`]),
      ]),
    );
  }
}

export function mountAdminApp(root: HTMLElement, baseUrl: string, runId: string): AdminApp {
  const app = new AdminApp(root, new StudyApi(baseUrl), runId);
  void app.start();
  return app;
}
