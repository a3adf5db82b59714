/**
 * Typed client for the study service HTTP API.
 *
 * The juror surface deliberately has no engine-related fields anywhere:
 * the backend strips engine identity before payloads leave it, and this
 * client only models what jurors and admins are allowed to see.
 */

export interface TaskProgress {
  total: number;
  judgeable: number;
  visited: number;
  graded: number;
}

export interface TaskResult {
  pooled_id: string;
  url: string;
  snapshot_id: string | null;
  /** server-relative path to the stored page, when one exists */
  snapshot_url?: string | null;
  available: boolean;
  judged: boolean;
}

export interface TaskPayload {
  task_id: string;
  query: string;
  progress: TaskProgress;
  results: TaskResult[];
}

export type BinaryJudgment = 'relevant' | 'not-relevant';

export interface JudgmentSubmission {
  pooled_id: string;
  binary?: BinaryJudgment;
  graded?: number;
  skipped?: boolean;
}

export interface JudgmentAck {
  accepted: boolean;
  task_id: string;
  completion: number | null;
  complete: boolean;
  voucher_issued: boolean;
  progress: TaskProgress;
}

export interface PendingVerdict {
  verdict_id: string;
  query: string;
  url: string;
  snapshot_id: string | null;
}

export interface TaskStatusRow {
  task_id: string;
  query: string;
  status: string;
  completion: number | null;
  progress: TaskProgress;
}

export interface StudyProgress {
  study_id: string;
  run_id: string;
  tasks: TaskStatusRow[];
  complete_tasks: number;
  session_throughput: Record<string, number>;
  voucher_events: number;
  pending_navigational: number;
  collection: {
    attempted: number;
    succeeded: number;
    failed: number;
    unresolved_urls: number;
    degraded: boolean;
  };
}

export interface VoucherEvent {
  session_id: string;
  task_id: string;
  issued_at: string;
  seq: number;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`${status}: ${detail}`);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class StudyApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = await response.json();
        if (body && typeof body.detail === 'string') detail = body.detail;
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(response.status, detail);
    }
    return response;
  }

  private json(body: unknown, method = 'POST'): RequestInit {
    return {
      method,
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    };
  }

  async openSession(accessCode: string): Promise<string> {
    const response = await this.request('/sessions', this.json({ access_code: accessCode }));
    const body = await response.json();
    return body.session_id as string;
  }

  /** Current or next task for the session; null when none remain. */
  async getTask(sessionId: string): Promise<TaskPayload | null> {
    const response = await this.request(`/sessions/${sessionId}/task`);
    if (response.status === 204) return null;
    return (await response.json()) as TaskPayload;
  }

  async submitJudgment(sessionId: string, submission: JudgmentSubmission): Promise<JudgmentAck> {
    const response = await this.request(
      `/sessions/${sessionId}/judgments`,
      this.json(submission),
    );
    return (await response.json()) as JudgmentAck;
  }

  async setContact(sessionId: string, address: string): Promise<void> {
    await this.request(`/sessions/${sessionId}/contact`, this.json({ address }, 'PUT'));
  }

  snapshotUrl(snapshotId: string): string {
    return `${this.baseUrl}/snapshots/${snapshotId}`;
  }

  // -- admin ------------------------------------------------------------

  private admin(token: string): RequestInit {
    return { headers: { 'X-Admin-Token': token } };
  }

  async studyProgress(runId: string, adminToken: string): Promise<StudyProgress> {
    const response = await this.request(`/runs/${runId}/progress`, this.admin(adminToken));
    return (await response.json()) as StudyProgress;
  }

  async pendingVerdicts(adminToken: string): Promise<PendingVerdict[]> {
    const response = await this.request('/verdicts/pending', this.admin(adminToken));
    return (await response.json()).pending as PendingVerdict[];
  }

  async postVerdict(
    adminToken: string,
    verdictId: string,
    correct: boolean,
    assessor: string,
  ): Promise<void> {
    await this.request('/verdicts', {
      method: 'POST',
      headers: { 'Content-Type': 'application/json', 'X-Admin-Token': adminToken },
      body: JSON.stringify({ verdict_id: verdictId, correct, assessor }),
    });
  }

  async pendingVouchers(adminToken: string): Promise<VoucherEvent[]> {
    const response = await this.request('/vouchers/pending', this.admin(adminToken));
    return (await response.json()).vouchers as VoucherEvent[];
  }
}
