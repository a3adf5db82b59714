/**
 * Scripted browser session against the real study service.
 *
 * The Python backend is prepared (sample + collect) and served twice on
 * local ports: the juror UI drives one store through a full task via DOM
 * clicks, a plain direct-API script drives the other, and the stored
 * judgment logs must come out identical. Along the way every rendered
 * screen is scanned for engine identifiers, and the planted snapshot with
 * external subresources is checked for sandbox containment (empty iframe
 * sandbox token list client-side, deny-all CSP server-side - jsdom does
 * not load subresources, so blocking is asserted on those two layers).
 */

import { ChildProcess, spawn, spawnSync } from 'node:child_process';
import { cpSync, mkdtempSync, readFileSync, readdirSync, rmSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { StudyApi, TaskPayload } from '../src/api.js';
import { JurorApp } from '../src/juror.js';

const REPO_ROOT = join(__dirname, '..', '..');
const DEMO_SRC = join(REPO_ROOT, 'fixtures', 'demo');
const ENGINE_TOKENS = ['srch-aq', 'srch-bo', 'aq suche', 'bo suche'];
const ACCESS_CODE = 'demo-juror-code';

let workDir: string;
let servers: { process: ChildProcess; base: string; store: string }[] = [];

function python(args: string[]): void {
  const result = spawnSync('python3', ['-m', 'serpeval.cli', ...args], {
    cwd: REPO_ROOT,
    encoding: 'utf-8',
  });
  if (result.status !== 0) {
    throw new Error(`serpeval ${args[0]} failed: ${result.stderr}`);
  }
}

async function startServer(configPath: string, store: string, port: number) {
  const child = spawn(
    'python3',
    [
      '-m', 'serpeval.cli', 'serve',
      '--config', configPath,
      '--store', store,
      '--listen', `127.0.0.1:${port}`,
    ],
    { cwd: REPO_ROOT, stdio: ['ignore', 'ignore', 'pipe'] },
  );
  const base = `http://127.0.0.1:${port}`;
  let stderr = '';
  child.stderr!.on('data', (chunk) => (stderr += chunk));
  for (let attempt = 0; attempt < 150; attempt++) {
    try {
      await fetch(`${base}/vouchers/pending`);
      return { process: child, base, store };
    } catch {
      if (child.exitCode !== null) throw new Error(`serve exited: ${stderr}`);
      await new Promise((resolve) => setTimeout(resolve, 100));
    }
  }
  throw new Error(`serve did not come up: ${stderr}`);
}

beforeAll(async () => {
  workDir = mkdtempSync(join(tmpdir(), 'serpeval-e2e-'));
  const demoDir = join(workDir, 'demo');
  cpSync(DEMO_SRC, demoDir, { recursive: true });
  const configPath = join(demoDir, 'config.json');

  const ports = [18731, 18732];
  const stores = [join(workDir, 'store-ui'), join(workDir, 'store-api')];
  for (const store of stores) {
    python(['sample', '--config', configPath, '--store', store]);
    python(['collect', '--config', configPath, '--store', store]);
  }
  servers = [
    await startServer(configPath, stores[0], ports[0]),
    await startServer(configPath, stores[1], ports[1]),
  ];
});

afterAll(() => {
  for (const server of servers) server.process.kill();
  if (workDir) rmSync(workDir, { recursive: true, force: true });
});

async function settle(): Promise<void> {
  for (let i = 0; i < 4; i++) await new Promise((resolve) => setTimeout(resolve, 15));
}

function click(root: HTMLElement, selector: string): void {
  const node = root.querySelector<HTMLButtonElement>(selector);
  expect(node, selector).not.toBeNull();
  node!.click();
}

function judgmentsInStore(store: string): Map<string, unknown> {
  const log = readFileSync(
    join(store, 'logs', 'judgments-demo-study.jsonl'),
    'utf-8',
  );
  const byPooled = new Map<string, unknown>();
  for (const line of log.trim().split('\n')) {
    const record = JSON.parse(line);
    byPooled.set(record.pooled_id, {
      task_id: record.task_id,
      binary: record.binary,
      graded: record.graded,
      skipped: record.skipped,
    });
  }
  return byPooled;
}

describe('live study service', () => {
  it('UI task flow stores the same judgments as a direct-API script', async () => {
    const [uiServer, apiServer] = servers;

    // --- scripted browser session through the real UI -------------------
    document.body.innerHTML = '<main id="app"></main>';
    let root = document.getElementById('app')!;
    window.localStorage.clear();
    const app = new JurorApp(root, new StudyApi(uiServer.base), window.localStorage);
    await app.start();

    root.querySelector<HTMLInputElement>('#access-code')!.value = ACCESS_CODE;
    click(root, '#login-button');
    await settle();
    expect(root.querySelector('#query-text')).not.toBeNull();

    const scanned: string[] = [];
    for (let guard = 0; guard < 40; guard++) {
      scanned.push(root.innerHTML);
      if (root.querySelector('#task-complete')) break;
      click(root, '[data-binary="relevant"]');
      await settle();
      click(root, '[data-grade="3"]');
      await settle();
      click(root, '#submit-judgment');
      await settle();
    }
    expect(root.querySelector('#task-complete'), 'task should complete').not.toBeNull();
    expect(root.querySelector('#voucher-notice')).not.toBeNull();

    for (const html of scanned) {
      const lowered = html.toLowerCase();
      for (const token of ENGINE_TOKENS) expect(lowered).not.toContain(token);
      expect(lowered).not.toContain('example.de'); // no result URLs on juror screens
    }

    // mid-flow refresh resumed nothing here (task completed), but the
    // session must survive a reload and report no dangling state
    const reloaded = new JurorApp(root, new StudyApi(uiServer.base), window.localStorage);
    await reloaded.start();
    expect(root.querySelector('#query-text, #all-done, #task-incomplete')).not.toBeNull();

    // --- the same task through the bare API ------------------------------
    const api = new StudyApi(apiServer.base);
    const session = await api.openSession(ACCESS_CODE);
    const task = (await api.getTask(session)) as TaskPayload;
    expect(task).not.toBeNull();
    for (const result of task.results) {
      await api.submitJudgment(session, {
        pooled_id: result.pooled_id,
        binary: 'relevant',
        graded: 3,
      });
    }

    // --- identical stored judgments --------------------------------------
    const uiJudgments = judgmentsInStore(uiServer.store);
    const apiJudgments = judgmentsInStore(apiServer.store);
    expect(uiJudgments.size).toBeGreaterThanOrEqual(task.results.length);
    expect(Object.fromEntries(uiJudgments)).toEqual(Object.fromEntries(apiJudgments));
  });

  it('serves juror payloads with zero engine identifiers', async () => {
    const api = new StudyApi(servers[1].base);
    const session = await api.openSession(ACCESS_CODE);
    const task = await api.getTask(session);
    const payload = JSON.stringify(task).toLowerCase();
    for (const token of ENGINE_TOKENS) expect(payload).not.toContain(token);
  });

  it('contains the planted external-subresource snapshot', async () => {
    const { base, store } = servers[0];
    // find the bait object in the content-addressed store
    const objectsDir = join(store, 'snapshots', 'objects');
    const baitId = readdirSync(objectsDir).find((name) =>
      readFileSync(join(objectsDir, name), 'utf-8').includes('evil-extern.example.com'),
    );
    expect(baitId, 'planted bait snapshot must exist').toBeDefined();

    const response = await fetch(`${base}/snapshots/${baitId}`);
    expect(response.status).toBe(200);
    const body = await response.text();
    expect(body).toContain('<script src="https://evil-extern.example.com/x.js">');

    // server side of the sandbox: deny-all CSP on the snapshot response
    expect(response.headers.get('content-security-policy')).toContain(
      "default-src 'none'",
    );

    // client side: the frame that would render it grants nothing
    const { createSnapshotFrame } = await import('../src/sandbox.js');
    const frame = createSnapshotFrame(`${base}/snapshots/${baitId}`);
    expect(frame.getAttribute('sandbox')).toBe('');
    expect(frame.getAttribute('referrerpolicy')).toBe('no-referrer');
  });
});
