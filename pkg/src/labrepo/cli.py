"""Administrative and batch command-line front door.

Exit codes: 0 success, 1 validation failure, 2 usage error, 3 internal
error.  Errors go to stderr with the same code identifiers the API uses.
A flagged submission is a workflow state, not a tool failure, so it exits
0; only malformed input is nonzero.

Commands run against a local store directory (``--store``), or proxy to a
running service with ``--remote URL --token TOKEN`` (actor identity then
comes from the token, and ``--by`` flags are ignored).
"""

from __future__ import annotations

import functools
import json
import sys
from datetime import datetime
from pathlib import Path

import click

from .api import load_config, serve
from .errors import LabRepoError
from .reports import report_payload
from .store import Repository, entry_payload, patient_payload


def _fail(code: str, detail: str, exit_code: int) -> None:
    click.echo(f"error: {code}: {detail}", err=True)
    sys.exit(exit_code)


def guarded(fn):
    """Map domain errors to exit 1 and unexpected ones to exit 3."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except LabRepoError as exc:
            _fail(exc.code, exc.detail, 1)
        except (click.ClickException, click.exceptions.Exit, SystemExit):
            raise
        except Exception as exc:  # pragma: no cover - defensive
            _fail("InternalError", f"{type(exc).__name__}: {exc}", 3)

    return wrapper


class DirectBackend:
    """Run commands against a local store directory."""

    def __init__(self, store_dir: str):
        self.repo = Repository(store_path=store_dir)

    def import_catalog(self, text: str, actor: str) -> dict:
        report = self.repo.import_catalog(text, actor=actor)
        return {"loaded": report.loaded, "errors": report.errors}

    def verify(self, slno: int, by: str) -> dict:
        entry = self.repo.verify_catalog_entry(slno, specialist_id=by)
        return {"slno": entry.slno, "test_name": entry.test_name}

    def register_patient(self, **kwargs) -> dict:
        return patient_payload(self.repo.register_patient(**kwargs))

    def submit(self, patient_uid: str, slno: int, value: str,
               unit: str | None, operator_id: str) -> dict:
        entry = self.repo.submit_result(patient_uid, slno, value, unit, operator_id)
        return entry_payload(entry)

    def flagged(self) -> list[dict]:
        return [entry_payload(e) for e in self.repo.flagged_entries()]

    def override(self, entry_id: str, by: str, reason: str) -> dict:
        return entry_payload(self.repo.apply_override(entry_id, by, reason))

    def reject(self, entry_id: str, by: str, reason: str) -> dict:
        return entry_payload(self.repo.reject_entry(entry_id, by, reason))

    def build_report(self, patient_uid: str, since: datetime | None,
                     until: datetime | None) -> dict:
        return report_payload(self.repo.build_report(patient_uid, since, until))

    def sign(self, report_id: str, by: str) -> dict:
        return report_payload(self.repo.sign_off(report_id, by))

    def render(self, report_id: str, fmt: str) -> bytes:
        return self.repo.render_report(report_id, fmt)

    def close(self) -> None:
        self.repo.close()


class RemoteBackend:
    """Proxy commands to a running service over its HTTP API."""

    def __init__(self, base_url: str, token: str | None):
        import httpx

        headers = {"Authorization": f"Bearer {token}"} if token else {}
        self.client = httpx.Client(base_url=base_url.rstrip("/"), headers=headers)

    def _unwrap(self, response) -> dict | list:
        if response.status_code >= 400:
            try:
                body = response.json()
            except ValueError:
                body = {"error": "InternalError", "detail": response.text}
            raise _RemoteError(body.get("error", "InternalError"),
                               body.get("detail", ""))
        return response.json()

    def import_catalog(self, text: str, actor: str) -> dict:
        return self._unwrap(self.client.post("/catalog/import", content=text.encode()))

    def verify(self, slno: int, by: str) -> dict:
        return self._unwrap(self.client.post(f"/catalog/{slno}/verify"))

    def register_patient(self, uid, full_name, dob, stated_age_years, contact, actor) -> dict:
        return self._unwrap(self.client.post("/patients", json={
            "patient_uid": uid,
            "full_name": full_name,
            "dob": dob.isoformat(),
            "stated_age_years": stated_age_years,
            "contact": contact,
        }))

    def submit(self, patient_uid, slno, value, unit, operator_id) -> dict:
        return self._unwrap(self.client.post("/results", json={
            "patient_uid": patient_uid,
            "slno": slno,
            "value": value,
            "unit": unit,
            "operator_id": operator_id,
        }))

    def flagged(self) -> list[dict]:
        return self._unwrap(self.client.get("/review/queue"))

    def override(self, entry_id: str, by: str, reason: str) -> dict:
        return self._unwrap(self.client.post(f"/results/{entry_id}/override",
                                             json={"reason": reason}))

    def reject(self, entry_id: str, by: str, reason: str) -> dict:
        return self._unwrap(self.client.post(f"/results/{entry_id}/reject",
                                             json={"reason": reason}))

    def build_report(self, patient_uid, since, until) -> dict:
        body = {"patient_uid": patient_uid}
        if since:
            body["since"] = since.isoformat()
        if until:
            body["until"] = until.isoformat()
        return self._unwrap(self.client.post("/reports", json=body))

    def sign(self, report_id: str, by: str) -> dict:
        return self._unwrap(self.client.post(f"/reports/{report_id}/signoff"))

    def render(self, report_id: str, fmt: str) -> bytes:
        response = self.client.get(f"/reports/{report_id}", params={"format": fmt})
        if response.status_code >= 400:
            self._unwrap(response)
        return response.content

    def close(self) -> None:
        self.client.close()


class _RemoteError(LabRepoError):
    def __init__(self, code: str, detail: str):
        super().__init__(detail)
        self._code = code

    @property
    def code(self) -> str:
        return self._code


@click.group()
@click.option("--store", "store_dir", envvar="LABREPO_STORE", default="./labrepo-store",
              show_default=True, help="Local store directory.")
@click.option("--remote", "remote_url", default=None,
              help="Proxy to a running service instead of opening the store.")
@click.option("--token", default=None, help="Bearer token for --remote mode.")
@click.pass_context
def main(ctx: click.Context, store_dir: str, remote_url: str | None, token: str | None):
    """Clinical lab-results repository: catalog, entry validation, review, reports."""
    ctx.ensure_object(dict)
    ctx.obj["store_dir"] = store_dir
    ctx.obj["remote_url"] = remote_url
    ctx.obj["token"] = token
    ctx.obj["backend"] = None


def backend(ctx: click.Context) -> DirectBackend | RemoteBackend:
    if ctx.obj["backend"] is None:
        if ctx.obj["remote_url"]:
            ctx.obj["backend"] = RemoteBackend(ctx.obj["remote_url"], ctx.obj["token"])
        else:
            ctx.obj["backend"] = DirectBackend(ctx.obj["store_dir"])
        ctx.call_on_close(ctx.obj["backend"].close)
    return ctx.obj["backend"]


@main.group()
def catalog():
    """Master-table maintenance."""


@catalog.command("import")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--by", "actor", default="admin", show_default=True,
              help="Importing actor recorded in the audit trail.")
@click.pass_context
@guarded
def catalog_import(ctx, file: str, actor: str):
    """Import reference ranges from a CSV file (SLNO,Test_Name,Value_Range)."""
    report = backend(ctx).import_catalog(Path(file).read_text(encoding="utf-8"), actor)
    click.echo(f"{report['loaded']} loaded, {len(report['errors'])} errors")
    for row_error in report["errors"]:
        click.echo(
            f"line {row_error['line']}: {row_error['error']}: {row_error['detail']}",
            err=True,
        )
    if report["errors"]:
        sys.exit(1)


@catalog.command("verify")
@click.argument("slno", type=int)
@click.option("--by", required=True, help="Specialist id.")
@click.pass_context
@guarded
def catalog_verify(ctx, slno: int, by: str):
    """Mark a catalog entry as specialist-verified."""
    result = backend(ctx).verify(slno, by)
    click.echo(f"entry {result['slno']} ({result['test_name']}) verified by {by}")


@main.group()
def patient():
    """Patient registry."""


@patient.command("add")
@click.option("--uid", required=True)
@click.option("--name", "full_name", required=True)
@click.option("--dob", required=True, type=click.DateTime(formats=["%Y-%m-%d"]))
@click.option("--age", "stated_age_years", required=True, type=int)
@click.option("--contact", default=None)
@click.option("--by", "actor", default="frontdesk", show_default=True,
              help="Registering actor recorded in the audit trail.")
@click.pass_context
@guarded
def patient_add(ctx, uid: str, full_name: str, dob: datetime,
                stated_age_years: int, contact: str | None, actor: str):
    """Register a patient; uid, DOB and age are validated hard."""
    result = backend(ctx).register_patient(
        uid=uid, full_name=full_name, dob=dob.date(),
        stated_age_years=stated_age_years, contact=contact, actor=actor,
    )
    click.echo(f"patient {result['patient_uid']} registered")


@main.group()
def result():
    """Transactional result entry."""


def _echo_submission(payload: dict) -> None:
    outcome = payload["level1"]["classification"]
    display = payload["level1"]["range_display"]
    label = "FLAGGED" if payload["status"] == "Flagged" else "ACCEPTED"
    suffix = f" (normal {display})" if display else ""
    click.echo(f"{label}: {outcome}{suffix}")
    click.echo(f"entry: {payload['entry_id']}")


@result.command("add")
@click.option("--patient", "patient_uid", required=True)
@click.option("--test", "slno", required=True, type=int)
@click.option("--value", required=True)
@click.option("--unit", default=None)
@click.option("--by", "operator_id", required=True)
@click.pass_context
@guarded
def result_add(ctx, patient_uid: str, slno: int, value: str,
               unit: str | None, operator_id: str):
    """Submit one observation; out-of-range values are flagged for review."""
    _echo_submission(backend(ctx).submit(patient_uid, slno, value, unit, operator_id))


@main.command("results")
@click.argument("action", type=click.Choice(["ingest"]))
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
@guarded
def results_batch(ctx, action: str, file: str):
    """Bulk-ingest results from a JSONL file.

    Each line: {"patient_uid", "slno", "value", "unit", "operator_id"}.
    Exits 0 only if every line was ingested (flagged still counts as
    ingested); any malformed or rejected line exits 1.
    """
    be = backend(ctx)
    accepted = flagged = errored = 0
    for line_no, line in enumerate(Path(file).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
            payload = be.submit(
                record["patient_uid"], record["slno"], record["value"],
                record.get("unit"), record["operator_id"],
            )
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            errored += 1
            click.echo(f"line {line_no}: error MalformedRow: {exc}", err=True)
            continue
        except LabRepoError as exc:
            errored += 1
            click.echo(f"line {line_no}: error {exc.code}: {exc.detail}", err=True)
            continue
        if payload["status"] == "Flagged":
            flagged += 1
            click.echo(f"line {line_no}: flagged {payload['entry_id']} "
                       f"({payload['level1']['classification']})")
        else:
            accepted += 1
            click.echo(f"line {line_no}: accepted {payload['entry_id']}")
    click.echo(f"accepted {accepted}, flagged {flagged}, errors {errored}")
    if errored:
        sys.exit(1)


@main.group()
def review():
    """Supervisor review of flagged entries."""


@review.command("list")
@click.pass_context
@guarded
def review_list(ctx):
    """List entries awaiting supervisor action."""
    rows = backend(ctx).flagged()
    if not rows:
        click.echo("review queue is empty")
        return
    for payload in rows:
        click.echo(
            f"{payload['entry_id']}  patient {payload['patient_uid']}  "
            f"test {payload['slno']}  value {payload['value_verbatim']}"
            f"{' ' + payload['unit'] if payload['unit'] else ''}  "
            f"{payload['level1']['classification']}"
            f" (normal {payload['level1']['range_display']})"
        )


@review.command("override")
@click.argument("entry_id")
@click.option("--by", required=True, help="Supervisor id (must differ from the operator).")
@click.option("--reason", required=True)
@click.pass_context
@guarded
def review_override(ctx, entry_id: str, by: str, reason: str):
    """Accept a flagged value with a recorded reason (four-eyes rule)."""
    payload = backend(ctx).override(entry_id, by, reason)
    click.echo(f"entry {payload['entry_id']} overridden by {by}")


@review.command("reject")
@click.argument("entry_id")
@click.option("--by", required=True)
@click.option("--reason", required=True)
@click.pass_context
@guarded
def review_reject(ctx, entry_id: str, by: str, reason: str):
    """Reject a flagged value; it is excluded from all future reports."""
    payload = backend(ctx).reject(entry_id, by, reason)
    click.echo(f"entry {payload['entry_id']} rejected by {by}")


@main.group()
def report():
    """Report assembly and sign-off."""


@report.command("build")
@click.option("--patient", "patient_uid", required=True)
@click.option("--since", default=None, type=click.DateTime())
@click.option("--until", default=None, type=click.DateTime())
@click.pass_context
@guarded
def report_build(ctx, patient_uid: str, since: datetime | None, until: datetime | None):
    """Assemble a draft report from all non-rejected entries."""
    payload = backend(ctx).build_report(patient_uid, since, until)
    click.echo(f"report {payload['report_id']} built ({len(payload['lines'])} lines)")


@report.command("sign")
@click.argument("report_id")
@click.option("--by", required=True, help="Supervisor id.")
@click.pass_context
@guarded
def report_sign(ctx, report_id: str, by: str):
    """Sign off a draft; requires every alert resolved and ranges verified."""
    payload = backend(ctx).sign(report_id, by)
    click.echo(f"report {payload['report_id']} signed off by {by}")


@report.command("print")
@click.argument("report_id")
@click.option("--format", "fmt", default="text",
              type=click.Choice(["text", "structured"]), show_default=True)
@click.pass_context
@guarded
def report_print(ctx, report_id: str, fmt: str):
    """Print a report as a fixed-width table or structured JSON."""
    sys.stdout.buffer.write(backend(ctx).render(report_id, fmt))
    sys.stdout.buffer.flush()


@main.command("serve")
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@guarded
def serve_cmd(config_path: str):
    """Run the HTTP service from a JSON config file."""
    serve(load_config(config_path))


if __name__ == "__main__":
    main()
