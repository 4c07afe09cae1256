"""Operator entry points: ingest, query, eval, serve, inspect.

Exit codes: 0 success, 1 success with per-asset failures, 2 fatal. The JSON
emitted by `query --json` matches the service's card payloads field for
field, so scripts can swap between the two freely.
"""

from __future__ import annotations

import json
import socket
import sys

import click

from . import __version__
from .config import CONFIG_ENV_VAR, build_gateway, build_vlm, load_app_config
from .errors import ArchSeekError, InputError
from .evaluation import EvalDataset, SystemVariant, run_eval, write_reports
from .index import CaseDatabase
from .ingest import IngestOptions, ingest_to_path
from .retrieval import text_query
from .service import _card, create_app

FATAL = 2
PARTIAL = 1


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)


def _load_config(config_path: str | None):
    try:
        return load_app_config(config_path)
    except ArchSeekError as exc:
        _fail(str(exc))
        sys.exit(FATAL)


@click.group()
@click.version_option(version=__version__, prog_name="archseek")
@click.option(
    "--config",
    "config_path",
    envvar=CONFIG_ENV_VAR,
    default=None,
    help="Config file (JSON; TOML on Python 3.11+). Defaults to $ARCHSEEK_CONFIG.",
)
@click.pass_context
def main(ctx: click.Context, config_path: str | None) -> None:
    """Multimodal design-case search: build a database, query it, serve it."""
    ctx.obj = {"config_path": config_path}


@main.command()
@click.argument("case_root", type=click.Path(exists=False))
@click.option("--out", "out_path", required=True, type=click.Path(), help="Database directory.")
@click.option("--providers", "providers_path", type=click.Path(exists=True), default=None,
              help="Providers config file (embedding + VLM).")
@click.option("--replay", "replay_dir", type=click.Path(), default=None,
              help="Replay VLM fixtures directory (offline critiques).")
@click.option("--jobs", default=1, show_default=True, help="Parallel critiques per case.")
@click.option("--chunk-chars", default=500, show_default=True,
              help="Description chunk budget in characters.")
@click.option("--critique-text-assets/--no-critique-text-assets", default=True,
              show_default=True, help="Also run text assets through the critic prompt.")
@click.pass_context
def ingest(ctx, case_root, out_path, providers_path, replay_dir, jobs, chunk_chars,
           critique_text_assets):
    """Build a searchable database from a folder of case directories."""
    cfg = _load_config(providers_path or ctx.obj.get("config_path"))
    try:
        gateway = build_gateway(cfg.providers)
        vlm = build_vlm(cfg.providers, replay_dir)
        options = IngestOptions(
            chunk_chars=chunk_chars,
            critique_text_assets=critique_text_assets,
            jobs=jobs,
        )
        db = ingest_to_path(case_root, out_path, gateway, vlm, options)
    except ArchSeekError as exc:
        _fail(str(exc))
        sys.exit(FATAL)

    report = db.ingest_report
    click.echo(f"ingested {len(db)} cases -> {out_path}")
    if report and not report.ok:
        click.echo(f"{len(report.failures)} asset failure(s):", err=True)
        for where, why in report.failures:
            click.echo(f"  {where}: {why}", err=True)
        sys.exit(PARTIAL)


@main.command()
@click.argument("db_path", type=click.Path(exists=True))
@click.argument("query_text")
@click.option("--top", default=5, show_default=True, help="Rows to print.")
@click.option("--json", "as_json", is_flag=True, help="Emit JSON instead of a table.")
@click.option("--providers", "providers_path", type=click.Path(exists=True), default=None)
@click.pass_context
def query(ctx, db_path, query_text, top, as_json, providers_path):
    """Rank cases for a text query and show the best-matching snippets."""
    if top < 1:
        _fail("--top must be >= 1")
        sys.exit(FATAL)
    cfg = _load_config(providers_path or ctx.obj.get("config_path"))
    try:
        db = CaseDatabase.load(db_path)
        gateway = build_gateway(cfg.providers)
        result = text_query(db, query_text, gateway)
    except ArchSeekError as exc:
        _fail(str(exc))
        sys.exit(FATAL)

    rows = result.rows[:top]
    if as_json:
        cards = [_card(db, row) for row in rows]
        click.echo(json.dumps({"query": query_text, "cards": cards}, indent=2, sort_keys=True))
        return
    for rank, row in enumerate(rows, start=1):
        case = db.case(row.case_id)
        snippet = ""
        if row.best_entry_id:
            entry = next((e for e in case.entries if e.entry_id == row.best_entry_id), None)
            snippet = entry.text if entry else ""
        click.echo(f"{rank:>2}. [{row.case_id:>3}] {case.title}  score={row.fused_score:.4f}")
        if snippet:
            click.echo(f"      {snippet}")


@main.command(name="eval")
@click.argument("db_path", type=click.Path(exists=True))
@click.argument("dataset_path", type=click.Path(exists=True))
@click.option("--variants", default="full,no_text_augmentation,no_image_embedding,text_only,random",
              show_default=True, help="Comma-separated system variants.")
@click.option("--kmax", default=10, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--seed", default=0, show_default=True)
@click.option("--providers", "providers_path", type=click.Path(exists=True), default=None)
@click.pass_context
def eval_command(ctx, db_path, dataset_path, variants, kmax, out_dir, seed, providers_path):
    """Run the retrieval evaluation protocol and write report.json/metrics.csv."""
    cfg = _load_config(providers_path or ctx.obj.get("config_path"))
    try:
        names = [v.strip() for v in variants.split(",") if v.strip()]
        try:
            chosen = [SystemVariant(name) for name in names]
        except ValueError as exc:
            raise InputError(f"unknown variant: {exc}") from exc
        db = CaseDatabase.load(db_path)
        gateway = build_gateway(cfg.providers)
        dataset = EvalDataset.load_jsonl(dataset_path)
        reports = [
            run_eval(db, gateway, dataset, variant, k_max=kmax, seed=seed)
            for variant in chosen
        ]
        json_path, csv_path = write_reports(reports, out_dir)
    except ArchSeekError as exc:
        _fail(str(exc))
        sys.exit(FATAL)
    click.echo(f"wrote {json_path} and {csv_path}")
    for report in reports:
        p5 = report.precision.means[min(4, report.k_max - 1)]
        click.echo(f"  {report.variant.value:<22} P@5={p5:.3f}")


@main.command()
@click.argument("db_path", type=click.Path(exists=True))
@click.option("--bind", default="127.0.0.1:8000", show_default=True, help="host:port")
@click.option("--ui", "ui_dir", type=click.Path(exists=True), default=None,
              help="Static web UI bundle to serve under /app.")
@click.option("--replay", "replay_dir", type=click.Path(), default=None)
@click.option("--providers", "providers_path", type=click.Path(exists=True), default=None)
@click.option("--seed", default=0, show_default=True)
@click.pass_context
def serve(ctx, db_path, bind, ui_dir, replay_dir, providers_path, seed):
    """Serve the query/session API (and optionally the web UI)."""
    import uvicorn

    cfg = _load_config(providers_path or ctx.obj.get("config_path"))
    try:
        host, _, port_text = bind.partition(":")
        port = int(port_text or "8000")
        db = CaseDatabase.load(db_path)
        gateway = build_gateway(cfg.providers)
        vlm = build_vlm(cfg.providers, replay_dir)
    except (ArchSeekError, ValueError) as exc:
        _fail(str(exc))
        sys.exit(FATAL)

    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((host or "127.0.0.1", port))
    except OSError as exc:
        _fail(f"cannot bind {bind}: {exc}")
        sys.exit(FATAL)
    finally:
        probe.close()

    app = create_app(
        db,
        gateway,
        vlm=vlm,
        seed=seed,
        session_ttl_seconds=cfg.session_ttl_seconds,
        ui_dir=ui_dir or cfg.ui_dir,
    )
    click.echo(f"serving {len(db)} cases on http://{host or '127.0.0.1'}:{port}")
    uvicorn.run(app, host=host or "127.0.0.1", port=port, log_level="warning")


@main.command()
@click.argument("db_path", type=click.Path(exists=True))
@click.option("--check", "do_check", is_flag=True, help="Revalidate invariants and checksums.")
@click.option("--case", "case_id", type=int, default=None, help="Show one case in detail.")
def inspect(db_path, do_check, case_id):
    """Summarize a database; --check revalidates every invariant."""
    try:
        db = CaseDatabase.load(db_path)
    except ArchSeekError as exc:
        _fail(str(exc))
        sys.exit(FATAL)

    if case_id is not None:
        if not db.has_case(case_id):
            _fail(f"unknown case {case_id}")
            sys.exit(FATAL)
        case = db.case(case_id)
        click.echo(f"[{case.case_id}] {case.title}")
        click.echo(f"  assets: {len(case.assets)}  entries: {len(case.entries)}")
        for entry in case.entries:
            click.echo(f"  ({entry.aspect.value}) {entry.text}")
        return

    total_entries = sum(len(c.entries) for c in db.cases)
    total_images = sum(len(c.image_embeddings) for c in db.cases)
    click.echo(f"cases: {len(db)}  entries: {total_entries}  image vectors: {total_images}")
    click.echo(
        f"text space: {db.manifest.text_space.model} (dim {db.manifest.text_space.dim})  "
        f"crossmodal: {db.manifest.crossmodal_space.model} (dim {db.manifest.crossmodal_space.dim})"
    )
    if do_check:
        problems = db.check()
        if problems:
            for problem in problems:
                click.echo(f"  {problem}", err=True)
            sys.exit(FATAL)
        click.echo("check: ok")


if __name__ == "__main__":
    main()
