"""HTTP/JSON interface for the operator console and integrations.

Static bearer tokens map to principals (role + actor id) via the service
config.  Every module error maps to exactly one HTTP status: validation
errors 422, unknown resources 404, auth 401/403, conflicts and illegal
transitions 409, store corruption 500.  Error bodies are always
``{"error": <code>, "detail": <human text>}``.
"""

from __future__ import annotations

import json
import re
import socket
from dataclasses import dataclass
from datetime import date, datetime
from enum import Enum
from pathlib import Path

from fastapi import Depends, FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse, Response
from pydantic import BaseModel

from . import errors
from .catalog import CatalogEntry
from .errors import ConfigInvalid, LabRepoError, PortUnavailable
from .patients import DEFAULT_UID_PATTERN
from .ranges import (
    Closed,
    LowerBound,
    RangeSpec,
    SingleValue,
    UpperBound,
    format_decimal,
)
from .reports import render_structured, report_payload
from .store import Repository, entry_payload, patient_payload


class Role(str, Enum):
    OPERATOR = "Operator"
    SUPERVISOR = "Supervisor"
    SPECIALIST = "Specialist"
    ADMIN = "Admin"


@dataclass(frozen=True)
class Principal:
    token: str
    role: Role
    actor_id: str


class Unauthorized(LabRepoError):
    pass


class Forbidden(LabRepoError):
    pass


# Mutating actions and the roles allowed to perform them.  Supervision acts
# (override/reject/sign-off) and specialist verification require the exact
# clinical role; Admin covers the administrative rest.  Reads and draft
# report builds are open to any authenticated principal.
ACTION_ROLES: dict[str, set[Role]] = {
    "catalog.import": {Role.ADMIN, Role.SPECIALIST},
    "catalog.verify": {Role.SPECIALIST},
    "patient.register": {Role.OPERATOR, Role.ADMIN},
    "result.submit": {Role.OPERATOR, Role.ADMIN},
    "review.override": {Role.SUPERVISOR},
    "review.reject": {Role.SUPERVISOR},
    "report.signoff": {Role.SUPERVISOR},
}

ERROR_STATUS: dict[type[LabRepoError], int] = {
    errors.MalformedRange: 422,
    errors.MalformedFile: 422,
    errors.MalformedRow: 422,
    errors.MalformedUid: 422,
    errors.FutureDob: 422,
    errors.AgeDobMismatch: 422,
    errors.NonNumericValue: 422,
    errors.EmptyReason: 422,
    errors.ConfigInvalid: 422,
    errors.UnknownSlno: 404,
    errors.UnknownPatient: 404,
    errors.UnknownEntry: 404,
    errors.UnknownReport: 404,
    errors.DuplicateSlno: 409,
    errors.DuplicateTestName: 409,
    errors.DuplicateUid: 409,
    errors.NotFlagged: 409,
    errors.SelfOverride: 409,
    errors.AlreadySignedOff: 409,
    errors.UnresolvedViolations: 409,
    errors.UnverifiedCatalogEntries: 409,
    errors.StoreInconsistent: 500,
    errors.PortUnavailable: 500,
    Unauthorized: 401,
    Forbidden: 403,
}


def authorize(principal: Principal, action: str) -> None:
    allowed = ACTION_ROLES.get(action)
    if allowed is not None and principal.role not in allowed:
        raise Forbidden(f"role {principal.role.value} may not perform {action}")


def spec_payload(spec: RangeSpec) -> dict:
    if isinstance(spec, Closed):
        return {"kind": spec.kind, "low": format_decimal(spec.low),
                "high": format_decimal(spec.high), "unit": spec.unit}
    if isinstance(spec, (UpperBound, LowerBound)):
        return {"kind": spec.kind, "limit": format_decimal(spec.limit), "unit": spec.unit}
    if isinstance(spec, SingleValue):
        return {"kind": spec.kind, "value": format_decimal(spec.value), "unit": spec.unit}
    return {"kind": spec.kind}


def catalog_entry_payload(entry: CatalogEntry) -> dict:
    return {
        "slno": entry.slno,
        "test_name": entry.test_name,
        "range_text": entry.range_text,
        "spec": spec_payload(entry.range),
        "verification": (
            {"specialist_id": entry.verification.specialist_id,
             "at": entry.verification.at.isoformat()}
            if entry.verification else None
        ),
        "review_note": entry.review_note,
    }


class PatientIn(BaseModel):
    patient_uid: str
    full_name: str
    dob: date
    stated_age_years: int
    contact: str | None = None


class ResultIn(BaseModel):
    patient_uid: str
    slno: int
    value: str
    unit: str | None = None
    operator_id: str | None = None


class ReviewIn(BaseModel):
    reason: str = ""


class ReportIn(BaseModel):
    patient_uid: str
    since: datetime | None = None
    until: datetime | None = None


def create_app(repo: Repository, tokens: dict[str, dict] | None = None) -> FastAPI:
    """Wire the repository behind the HTTP surface.

    ``tokens`` maps opaque bearer tokens to ``{"role", "actor_id"}``.
    """
    principals: dict[str, Principal] = {}
    for token, ident in (tokens or {}).items():
        principals[token] = Principal(
            token=token, role=Role(ident["role"]), actor_id=ident["actor_id"]
        )

    app = FastAPI(title="labrepo", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],  # the browser console runs from its own origin
        allow_methods=["*"],
        allow_headers=["*"],
    )

    def current_principal(request: Request) -> Principal:
        header = request.headers.get("authorization", "")
        match = re.fullmatch(r"Bearer\s+(\S+)", header)
        if not match or match.group(1) not in principals:
            raise Unauthorized("missing or unknown bearer token")
        return principals[match.group(1)]

    @app.exception_handler(LabRepoError)
    async def domain_error(request: Request, exc: LabRepoError) -> JSONResponse:
        status = ERROR_STATUS.get(type(exc), 500)
        return JSONResponse(status_code=status,
                            content={"error": exc.code, "detail": exc.detail})

    @app.exception_handler(RequestValidationError)
    async def body_error(request: Request, exc: RequestValidationError) -> JSONResponse:
        return JSONResponse(status_code=422,
                            content={"error": "InvalidRequest", "detail": str(exc)})

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok"}

    @app.post("/catalog/import")
    async def catalog_import(request: Request,
                             principal: Principal = Depends(current_principal)) -> dict:
        authorize(principal, "catalog.import")
        text = (await request.body()).decode("utf-8", errors="replace")
        report = repo.import_catalog(text, actor=principal.actor_id)
        return {"loaded": report.loaded, "errors": report.errors}

    @app.get("/catalog")
    def catalog_list(filter: str | None = Query(default=None),
                     principal: Principal = Depends(current_principal)) -> list[dict]:
        return [catalog_entry_payload(e) for e in repo.list_tests(filter)]

    @app.get("/catalog/{slno}/range")
    def catalog_range(slno: int,
                      principal: Principal = Depends(current_principal)) -> dict:
        entry, version = repo.range_hint(slno)
        return {
            "slno": slno,
            "test_name": entry.test_name,
            "display_text": entry.range_text,
            "spec": spec_payload(entry.range),
            "verification": catalog_entry_payload(entry)["verification"],
            "catalog_version": version,
        }

    @app.post("/catalog/{slno}/verify")
    def catalog_verify(slno: int,
                       principal: Principal = Depends(current_principal)) -> dict:
        authorize(principal, "catalog.verify")
        entry = repo.verify_catalog_entry(slno, specialist_id=principal.actor_id)
        return catalog_entry_payload(entry)

    @app.post("/patients")
    def patient_register(body: PatientIn,
                         principal: Principal = Depends(current_principal)) -> dict:
        authorize(principal, "patient.register")
        patient = repo.register_patient(
            uid=body.patient_uid,
            full_name=body.full_name,
            dob=body.dob,
            stated_age_years=body.stated_age_years,
            contact=body.contact,
            actor=principal.actor_id,
        )
        return patient_payload(patient)

    @app.get("/patients")
    def patient_search(query: str = Query(default=""),
                       principal: Principal = Depends(current_principal)) -> list[dict]:
        return [patient_payload(p) for p in repo.find_patients(query)]

    @app.post("/results")
    def result_submit(body: ResultIn,
                      principal: Principal = Depends(current_principal)) -> dict:
        authorize(principal, "result.submit")
        entry = repo.submit_result(
            patient_uid=body.patient_uid,
            slno=body.slno,
            raw_value=body.value,
            unit=body.unit,
            operator_id=body.operator_id or principal.actor_id,
        )
        return entry_payload(entry)

    @app.get("/review/queue")
    def review_queue(principal: Principal = Depends(current_principal)) -> list[dict]:
        return [entry_payload(e) for e in repo.flagged_entries()]

    @app.post("/results/{entry_id}/override")
    def review_override(entry_id: str, body: ReviewIn,
                        principal: Principal = Depends(current_principal)) -> dict:
        authorize(principal, "review.override")
        entry = repo.apply_override(entry_id, supervisor_id=principal.actor_id,
                                    reason=body.reason)
        return entry_payload(entry)

    @app.post("/results/{entry_id}/reject")
    def review_reject(entry_id: str, body: ReviewIn,
                      principal: Principal = Depends(current_principal)) -> dict:
        authorize(principal, "review.reject")
        entry = repo.reject_entry(entry_id, supervisor_id=principal.actor_id,
                                  reason=body.reason)
        return entry_payload(entry)

    @app.post("/reports")
    def report_build(body: ReportIn,
                     principal: Principal = Depends(current_principal)) -> dict:
        report = repo.build_report(body.patient_uid, since=body.since, until=body.until)
        return report_payload(report)

    @app.post("/reports/{report_id}/signoff")
    def report_signoff(report_id: str,
                       principal: Principal = Depends(current_principal)) -> dict:
        authorize(principal, "report.signoff")
        report = repo.sign_off(report_id, supervisor_id=principal.actor_id)
        return report_payload(report)

    @app.get("/reports/{report_id}")
    def report_get(report_id: str, format: str = Query(default="structured"),
                   principal: Principal = Depends(current_principal)) -> Response:
        if format not in ("text", "structured"):
            raise RequestValidationError(
                [{"loc": ("query", "format"), "msg": "must be 'text' or 'structured'"}]
            )
        report = repo.get_report(report_id)
        if format == "text":
            return PlainTextResponse(repo.render_report(report_id, "text"))
        return Response(content=render_structured(report), media_type="application/json")

    return app


# --------------------------------------------------------------------------
# Service configuration and startup
# --------------------------------------------------------------------------

def load_config(path: str | Path) -> dict:
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config file {path}: {exc}") from exc
    try:
        config = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"config is not valid JSON: {exc}") from exc
    return validate_config(config)


def validate_config(config: dict) -> dict:
    if not isinstance(config, dict):
        raise ConfigInvalid("config must be a JSON object")
    port = config.get("port")
    if not isinstance(port, int) or not 1 <= port <= 65535:
        raise ConfigInvalid("config key 'port' must be an integer in 1..65535")
    store_path = config.get("store_path")
    if not isinstance(store_path, str) or not store_path:
        raise ConfigInvalid("config key 'store_path' is required")
    uid_pattern = config.get("uid_pattern", DEFAULT_UID_PATTERN)
    try:
        re.compile(uid_pattern)
    except re.error as exc:
        raise ConfigInvalid(f"config key 'uid_pattern' is not a valid regex: {exc}") from exc
    tokens = config.get("tokens", {})
    if not isinstance(tokens, dict):
        raise ConfigInvalid("config key 'tokens' must map token -> {role, actor_id}")
    for token, ident in tokens.items():
        if not isinstance(ident, dict) or "role" not in ident or "actor_id" not in ident:
            raise ConfigInvalid(f"token {token!r} must define 'role' and 'actor_id'")
        try:
            Role(ident["role"])
        except ValueError as exc:
            raise ConfigInvalid(f"token {token!r} has unknown role {ident['role']!r}") from exc
    host = config.get("host", "127.0.0.1")
    if not isinstance(host, str):
        raise ConfigInvalid("config key 'host' must be a string")
    return {"port": port, "store_path": store_path, "uid_pattern": uid_pattern,
            "tokens": tokens, "host": host}


def serve(config: dict) -> None:
    """Validate config, claim the port and run the service until terminated."""
    import uvicorn

    config = validate_config(config)
    try:
        probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((config["host"], config["port"]))
        probe.close()
    except OSError as exc:
        raise PortUnavailable(
            f"cannot bind {config['host']}:{config['port']}: {exc}"
        ) from exc
    repo = Repository(store_path=config["store_path"], uid_pattern=config["uid_pattern"])
    app = create_app(repo, config["tokens"])
    try:
        uvicorn.run(app, host=config["host"], port=config["port"], log_level="warning")
    finally:
        repo.close()
