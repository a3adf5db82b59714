import { describe, expect, it } from 'vitest';

import { ApiError, StudyApi } from '../src/api.js';
import { FakeStudyServer, makeTask } from './fake_server.js';

function apiFor(server: FakeStudyServer): StudyApi {
  return new StudyApi('', server.fetch);
}

describe('StudyApi', () => {
  it('opens a session with the right code', async () => {
    const server = new FakeStudyServer('code-1', [makeTask('t1', 'wetter', 3)]);
    const api = apiFor(server);
    const session = await api.openSession('code-1');
    expect(session).toMatch(/^s-fake-/);
  });

  it('surfaces an ApiError with status on a wrong code', async () => {
    const server = new FakeStudyServer('code-1', []);
    const api = apiFor(server);
    await expect(api.openSession('nope')).rejects.toMatchObject({
      status: 403,
      detail: 'invalid code',
    });
  });

  it('maps 204 to null for an exhausted study', async () => {
    const server = new FakeStudyServer('code-1', []);
    const api = apiFor(server);
    const session = await api.openSession('code-1');
    expect(await api.getTask(session)).toBeNull();
  });

  it('returns task payloads without any engine-shaped fields', async () => {
    const server = new FakeStudyServer('code-1', [makeTask('t1', 'wetter', 2)]);
    const api = apiFor(server);
    const session = await api.openSession('code-1');
    const task = await api.getTask(session);
    expect(task).not.toBeNull();
    expect(task!.query).toBe('wetter');
    for (const result of task!.results) {
      expect(Object.keys(result).sort()).toEqual(
        ['available', 'judged', 'pooled_id', 'snapshot_id', 'snapshot_url', 'url'].sort(),
      );
    }
  });

  it('submits judgments and reads back acks', async () => {
    const server = new FakeStudyServer('code-1', [makeTask('t1', 'wetter', 1)]);
    const api = apiFor(server);
    const session = await api.openSession('code-1');
    const task = await api.getTask(session);
    const ack = await api.submitJudgment(session, {
      pooled_id: task!.results[0].pooled_id,
      binary: 'relevant',
      graded: 3,
    });
    expect(ack.complete).toBe(true);
    expect(server.judgments).toHaveLength(1);
    expect(server.judgments[0]).toMatchObject({ binary: 'relevant', graded: 3 });
  });

  it('propagates rejection details', async () => {
    const server = new FakeStudyServer('code-1', [makeTask('t1', 'wetter', 1)]);
    const api = apiFor(server);
    const session = await api.openSession('code-1');
    await api.getTask(session);
    await expect(
      api.submitJudgment(session, { pooled_id: 'p-elsewhere', binary: 'relevant' }),
    ).rejects.toBeInstanceOf(ApiError);
  });

  it('builds snapshot URLs against the base', () => {
    const api = new StudyApi('http://127.0.0.1:9000');
    expect(api.snapshotUrl('abc123')).toBe('http://127.0.0.1:9000/snapshots/abc123');
  });
});
