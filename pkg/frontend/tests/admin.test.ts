import { beforeEach, describe, expect, it } from 'vitest';

import { StudyApi } from '../src/api.js';
import { AdminApp } from '../src/admin.js';

const PROGRESS = {
  study_id: 'demo-study',
  run_id: 'demo-run',
  tasks: [
    {
      task_id: 'task-1',
      query: 'wetter berlin',
      status: 'complete',
      completion: 1.0,
      progress: { total: 17, judgeable: 17, visited: 17, graded: 17 },
    },
    {
      task_id: 'task-2',
      query: 'grippe symptome',
      status: 'open',
      completion: 0.5,
      progress: { total: 16, judgeable: 16, visited: 8, graded: 8 },
    },
  ],
  complete_tasks: 1,
  session_throughput: { 's-1': 17, 's-2': 8 },
  voucher_events: 1,
  pending_navigational: 2,
  collection: { attempted: 120, succeeded: 119, failed: 1, unresolved_urls: 1, degraded: false },
};

function makeAdminFetch(state: {
  token: string;
  pending: { verdict_id: string; query: string; url: string; snapshot_id: string | null }[];
  verdicts: { verdict_id: string; correct: boolean }[];
}) {
  return async (input: string, init?: RequestInit): Promise<Response> => {
    const url = new URL(input, 'http://fake.local');
    const headers = new Headers(init?.headers);
    if (headers.get('X-Admin-Token') !== state.token) {
      return json(403, { detail: 'forbidden' });
    }
    if (url.pathname === '/runs/demo-run/progress') return json(200, PROGRESS);
    if (url.pathname === '/verdicts/pending') return json(200, { pending: state.pending });
    if (url.pathname === '/vouchers/pending') {
      return json(200, {
        vouchers: [{ session_id: 's-1', task_id: 'task-1', issued_at: 't', seq: 0 }],
      });
    }
    if (url.pathname === '/verdicts' && init?.method === 'POST') {
      const body = JSON.parse(String(init.body));
      state.verdicts.push({ verdict_id: body.verdict_id, correct: body.correct });
      state.pending = state.pending.filter((item) => item.verdict_id !== body.verdict_id);
      return json(201, { query: 'x', correct: body.correct });
    }
    return json(404, { detail: 'no route' });
  };
}

function json(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'Content-Type': 'application/json' },
  });
}

async function settle(): Promise<void> {
  for (let i = 0; i < 3; i++) await new Promise((resolve) => setTimeout(resolve, 0));
}

let root: HTMLElement;

beforeEach(() => {
  document.body.innerHTML = '<main id="app"></main>';
  root = document.getElementById('app')!;
});

async function openDashboard(state: ReturnType<typeof makeState>): Promise<AdminApp> {
  const app = new AdminApp(root, new StudyApi('', makeAdminFetch(state)), 'demo-run');
  await app.start();
  root.querySelector<HTMLInputElement>('#admin-token')!.value = state.token;
  root.querySelector<HTMLButtonElement>('#admin-login')!.click();
  await settle();
  return app;
}

function makeState() {
  return {
    token: 'admin-token',
    pending: [
      {
        verdict_id: 'v-1',
        query: 'telekom',
        url: 'https://www.telekom.example.de/',
        snapshot_id: 'snap-1',
      },
      {
        verdict_id: 'v-2',
        query: 'postbank',
        url: 'https://verzeichnis.example.org/postbank',
        snapshot_id: null,
      },
    ],
    verdicts: [] as { verdict_id: string; correct: boolean }[],
  };
}

describe('admin dashboard', () => {
  it('rejects a wrong token without leaking state', async () => {
    const state = makeState();
    const app = new AdminApp(root, new StudyApi('', makeAdminFetch(state)), 'demo-run');
    await app.start();
    root.querySelector<HTMLInputElement>('#admin-token')!.value = 'wrong';
    root.querySelector<HTMLButtonElement>('#admin-login')!.click();
    await settle();
    expect(root.querySelector('#admin-error')!.textContent).toBe('Not authorized.');
    expect(root.querySelector('#summary')).toBeNull();
  });

  it('shows completion fractions, throughput, vouchers and collection errors', async () => {
    await openDashboard(makeState());
    expect(root.querySelector('#stat-tasks')!.textContent).toBe('Tasks complete: 1 / 2');
    expect(root.querySelector('#stat-vouchers')!.textContent).toBe('Voucher events: 1');
    expect(root.querySelector('#stat-pending-nav')!.textContent).toContain('pending: 2');
    expect(root.querySelector('#stat-collection')!.textContent).toContain('1 failed');
    expect(root.querySelector('#stat-collection')!.textContent).toContain('1 unresolved');

    const rows = [...root.querySelectorAll('#task-table tbody tr')];
    expect(rows).toHaveLength(2);
    expect(rows[0].textContent).toContain('wetter berlin');
    expect(rows[0].textContent).toContain('100%');
    expect(rows[1].textContent).toContain('50%');
    expect(root.querySelector('#throughput-table')!.textContent).toContain('17');
  });

  it('walks the navigational verdict queue without showing engines', async () => {
    const state = makeState();
    await openDashboard(state);
    root.querySelector<HTMLButtonElement>('#open-verdicts')!.click();
    await settle();

    expect(root.querySelector('#verdict-query')!.textContent).toBe('telekom');
    const rendered = root.innerHTML.toLowerCase();
    for (const token of ['srch-aq', 'srch-bo', 'engine_id', 'aq suche', 'bo suche']) {
      expect(rendered).not.toContain(token);
    }
    expect(root.querySelector('.snapshot-frame')).not.toBeNull();

    root.querySelector<HTMLButtonElement>('#verdict-correct')!.click();
    await settle();
    expect(state.verdicts).toEqual([{ verdict_id: 'v-1', correct: true }]);

    // second item has no snapshot: placeholder, wrong-page verdict
    expect(root.querySelector('.snapshot-unavailable')).not.toBeNull();
    root.querySelector<HTMLButtonElement>('#verdict-incorrect')!.click();
    await settle();
    expect(state.verdicts).toEqual([
      { verdict_id: 'v-1', correct: true },
      { verdict_id: 'v-2', correct: false },
    ]);
    expect(root.querySelector('#verdicts-done')).not.toBeNull();
  });
});
