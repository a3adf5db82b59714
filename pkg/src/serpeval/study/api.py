"""HTTP face of the study service.

Juror endpoints (access-code sessions):
    POST /sessions {access_code}                 -> {session_id}
    GET  /sessions/{id}/task                     -> task payload | 204
    POST /sessions/{id}/judgments {...}          -> ack with completion
    PUT  /sessions/{id}/contact {address}        -> voucher delivery address
    GET  /snapshots/{snapshot_id}                -> stored bytes + content type

Admin endpoints (X-Admin-Token header):
    GET  /runs/{run_id}/progress
    GET  /verdicts/pending
    POST /verdicts {verdict_id, correct, assessor}
    GET  /vouchers/pending

Snapshot responses carry a deny-all content security policy so a juror UI
can render them in a sandboxed frame without third-party loads leaking
the study.
"""

from __future__ import annotations

from fastapi import FastAPI, Header, HTTPException, Response
from pydantic import BaseModel, Field

from ..store import FileStore
from .service import AuthError, JudgmentError, LeaseError, StudyService, VerdictError

SNAPSHOT_CSP = "default-src 'none'; style-src 'unsafe-inline'; img-src data:"


class SessionRequest(BaseModel):
    access_code: str


class ContactRequest(BaseModel):
    address: str


class JudgmentRequest(BaseModel):
    pooled_id: str
    binary: str | None = None
    graded: int | None = None
    skipped: bool = False


class VerdictRequest(BaseModel):
    verdict_id: str
    correct: bool
    assessor: str = Field(min_length=1)


def create_app(service: StudyService, store: FileStore) -> FastAPI:
    app = FastAPI(title="relevance study", docs_url=None, redoc_url=None)

    def admin(token: str | None) -> None:
        try:
            service.verify_admin(token or "")
        except AuthError:
            raise HTTPException(status_code=403, detail="forbidden") from None

    @app.post("/sessions", status_code=201)
    def open_session(body: SessionRequest):
        try:
            session_id = service.open_session(body.access_code)
        except AuthError:
            raise HTTPException(status_code=403, detail="invalid code") from None
        return {"session_id": session_id}

    @app.put("/sessions/{session_id}/contact")
    def set_contact(session_id: str, body: ContactRequest):
        try:
            service.set_contact(session_id, body.address)
        except AuthError:
            raise HTTPException(status_code=403, detail="unknown session") from None
        return {"ok": True}

    @app.get("/sessions/{session_id}/task")
    def get_task(session_id: str):
        try:
            payload = service.task_payload(session_id)
        except AuthError:
            raise HTTPException(status_code=403, detail="unknown session") from None
        if payload is None:
            return Response(status_code=204)
        return payload

    @app.post("/sessions/{session_id}/judgments")
    def post_judgment(session_id: str, body: JudgmentRequest):
        try:
            return service.record_judgment(
                session_id,
                body.pooled_id,
                binary=body.binary,
                graded=body.graded,
                skipped=body.skipped,
            )
        except AuthError:
            raise HTTPException(status_code=403, detail="unknown session") from None
        except LeaseError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from None
        except JudgmentError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None

    @app.get("/snapshots/{snapshot_id}")
    def get_snapshot(snapshot_id: str):
        try:
            content, meta = store.get_snapshot(snapshot_id)
        except KeyError:
            raise HTTPException(status_code=404, detail="snapshot not found") from None
        return Response(
            content=content,
            media_type=meta.get("content_type") or "application/octet-stream",
            headers={
                "Content-Security-Policy": SNAPSHOT_CSP,
                "X-Content-Type-Options": "nosniff",
            },
        )

    @app.get("/runs/{run_id}/progress")
    def run_progress(run_id: str, x_admin_token: str | None = Header(default=None)):
        admin(x_admin_token)
        report = service.progress_report()
        if report["run_id"] != run_id:
            raise HTTPException(status_code=404, detail="unknown run")
        run_record = store.get_record("runs", report["run_id"])
        report["collection"] = {
            "attempted": run_record["counters"]["attempted"],
            "succeeded": run_record["counters"]["succeeded"],
            "failed": run_record["counters"]["failed"],
            "unresolved_urls": run_record["counters"]["unresolved_urls"],
            "degraded": run_record["degraded"],
        }
        return report

    @app.get("/verdicts/pending")
    def pending_verdicts(x_admin_token: str | None = Header(default=None)):
        admin(x_admin_token)
        return {"pending": service.pending_navigational()}

    @app.post("/verdicts", status_code=201)
    def post_verdict(body: VerdictRequest, x_admin_token: str | None = Header(default=None)):
        admin(x_admin_token)
        try:
            verdict = service.record_navigational_verdict(
                body.verdict_id, body.correct, body.assessor
            )
        except VerdictError as exc:
            status = 404 if "unknown" in str(exc) else 409
            raise HTTPException(status_code=status, detail=str(exc)) from None
        return {"query": verdict["query"], "correct": verdict["correct"]}

    @app.get("/vouchers/pending")
    def pending_vouchers(x_admin_token: str | None = Header(default=None)):
        admin(x_admin_token)
        return {"vouchers": service.voucher_events()}

    return app
