"""Batch entry points: offline pipeline runs, the ablation harness, rationale
accuracy scoring, documentation export, and the HTTP service.

Exit codes: 0 success, 2 input/validation error, 3 provider failure (partial
output is still written). Errors never escape as tracebacks.
"""

from __future__ import annotations

import json
import os
import sys
import tempfile
from pathlib import Path
from typing import Optional

import click

from . import gateway as gw
from . import metrics
from .model import InvariantViolation, MalformedRecord, parse_session_log
from .segmentation import GroupingVariant
from .service import EngineConfig, SessionEngine, create_app

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_PROVIDER = 3


def _build_gateway(mode: str, fixtures: Optional[str], temperature: float,
                   endpoint: Optional[str], model: Optional[str]) -> gw.Gateway:
    config = gw.ProviderConfig.from_env(
        mode=mode,
        temperature=temperature,
        fixtures_dir=Path(fixtures) if fixtures else None,
        **({"endpoint": endpoint} if endpoint else {}),
        **({"model": model} if model else {}),
    )
    return gw.Gateway(config)


def _write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")


provider_options = [
    click.option("--provider-mode", type=click.Choice(["live", "scripted", "heuristic"]),
                 default="scripted", show_default=True),
    click.option("--fixtures", type=click.Path(), default=None,
                 help="Fixture directory for scripted mode."),
    click.option("--temperature", type=float, default=0.3, show_default=True),
    click.option("--endpoint", default=None, help="Live-mode endpoint (or PROVIDER_ENDPOINT)."),
    click.option("--model", default=None, help="Live-mode model name (or PROVIDER_MODEL)."),
]


def with_provider_options(fn):
    for option in reversed(provider_options):
        fn = option(fn)
    return fn


@click.group()
def main() -> None:
    """Capture decision steps from session logs and benchmark the pipeline."""


@main.command("run")
@click.argument("session_log", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(), help="Output directory.")
@click.option("--variant", type=click.Choice(["v1", "v2", "v3"]), default="v3", show_default=True)
@click.option("--simultaneity-window", type=float, default=0.5, show_default=True)
@click.option("--snapshots", type=click.Path(), default=None, help="Snapshot store directory.")
@with_provider_options
def cmd_run(session_log, out, variant, simultaneity_window, snapshots,
            provider_mode, fixtures, temperature, endpoint, model) -> None:
    """Run the full pipeline offline over one session log."""
    log_path = Path(session_log)
    out_dir = Path(out)
    try:
        events = parse_session_log(log_path.read_text(encoding="utf-8").splitlines())
    except (MalformedRecord, InvariantViolation) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INPUT)
    try:
        gateway = _build_gateway(provider_mode, fixtures, temperature, endpoint, model)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INPUT)

    session_id = log_path.stem
    config = EngineConfig(
        variant=GroupingVariant(variant), simultaneity_window=simultaneity_window
    )
    incomplete = False
    with tempfile.TemporaryDirectory(prefix="declink-run-") as workdir:
        engine = SessionEngine(Path(workdir), gateway, config,
                               snapshots_root=Path(snapshots) if snapshots else None)
        engine.create_session(session_id)
        try:
            engine.append_events(session_id, events)
            engine.flush_pending(session_id)
        except gw.ProviderUnavailable as exc:
            click.echo(f"provider failure: {exc}", err=True)
            incomplete = True
        docs = engine.get_documentation(session_id)
        steps = engine.get_steps(session_id)
    if incomplete:
        docs["incomplete"] = True
        steps["incomplete"] = True
    _write_json(out_dir / "documentation.json", docs)
    _write_json(out_dir / "steps.json", steps)
    click.echo(f"wrote {out_dir / 'documentation.json'} ({len(docs['steps'])} steps)")
    sys.exit(EXIT_PROVIDER if incomplete else EXIT_OK)


@main.command("eval-ablation")
@click.argument("dataset_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--conditions", default=",".join(metrics.DEFAULT_CONDITIONS), show_default=True,
              help="Comma-separated condition labels.")
@click.option("--out", required=True, type=click.Path(), help="Output CSV path.")
@click.option("--simultaneity-window", type=float, default=0.5, show_default=True)
@with_provider_options
def cmd_eval_ablation(dataset_dir, conditions, out, simultaneity_window,
                      provider_mode, fixtures, temperature, endpoint, model) -> None:
    """Run the segmentation ablation over a dataset directory."""
    try:
        condition_objs = [metrics.AblationCondition.from_label(label.strip())
                          for label in conditions.split(",") if label.strip()]
        dataset = metrics.load_dataset(Path(dataset_dir))
        gateway = _build_gateway(provider_mode, fixtures, temperature, endpoint, model)
    except (ValueError, FileNotFoundError, MalformedRecord, InvariantViolation) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INPUT)
    rows, meta = metrics.run_ablation(dataset, condition_objs, gateway, simultaneity_window)
    out_path = Path(out)
    metrics.write_ablation_csv(rows, out_path)
    _write_json(out_path.with_suffix(out_path.suffix + ".meta.json"), meta)
    for row in rows:
        click.echo(
            f"{row['condition']}: wd={row['window_diff']} p={row['precision']} "
            f"r={row['recall']} f1={row['f1']} skipped={row['skipped']}"
        )
    sys.exit(EXIT_OK)


def _load_labels(path: Path) -> list[tuple[str, str]]:
    data = json.loads(path.read_text(encoding="utf-8"))
    if isinstance(data, dict):
        items = data.get("step_labels", data)
        if isinstance(items, dict):
            return sorted(items.items())
        data = items
    if isinstance(data, list):
        return [(str(rec["step_id"]), str(rec["label"])) for rec in data]
    raise ValueError(f"{path}: expected a label mapping or list")


@main.command("eval-rationale")
@click.argument("gold_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("pred_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(), default=None, help="Optional JSON output path.")
def cmd_eval_rationale(gold_path, pred_path, out) -> None:
    """Score Strong/Weak/Empty predictions against gold labels."""
    try:
        gold = _load_labels(Path(gold_path))
        predicted = _load_labels(Path(pred_path))
        scores = metrics.score_rationale_accuracy(gold, predicted)
    except (ValueError, KeyError, json.JSONDecodeError, metrics.IdMismatch) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INPUT)
    click.echo(f"overall accuracy: {scores['overall']:.4f} over {scores['total']} steps")
    for label, acc in scores["per_class"].items():
        click.echo(f"  {label}: {acc:.4f}")
    if out:
        _write_json(Path(out), scores)
    sys.exit(EXIT_OK)


@main.command("export-docs")
@click.option("--data-dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--session", required=True, help="Session id to export.")
@click.option("--out", required=True, type=click.Path())
@with_provider_options
def cmd_export_docs(data_dir, session, out, provider_mode, fixtures, temperature,
                    endpoint, model) -> None:
    """Rebuild a persisted session from its logs and export documentation."""
    try:
        gateway = _build_gateway(provider_mode, fixtures, temperature, endpoint, model)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INPUT)
    try:
        engine = SessionEngine(Path(data_dir), gateway, EngineConfig())
        docs = engine.get_documentation(session)
    except gw.ProviderUnavailable as exc:
        click.echo(f"provider failure: {exc}", err=True)
        sys.exit(EXIT_PROVIDER)
    except Exception as exc:  # unknown session, malformed logs
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INPUT)
    _write_json(Path(out), docs)
    click.echo(f"wrote {out}")
    sys.exit(EXIT_OK)


@main.command("serve")
@click.option("--port", type=int, default=lambda: int(os.environ.get("PORT", "8040")))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--data-dir", type=click.Path(), default=lambda: os.environ.get("DATA_DIR", "./data"))
@click.option("--poll-timeout", type=float, default=25.0, show_default=True)
@click.option("--variant", type=click.Choice(["v1", "v2", "v3"]), default="v3", show_default=True)
@with_provider_options
def cmd_serve(port, host, data_dir, poll_timeout, variant,
              provider_mode, fixtures, temperature, endpoint, model) -> None:
    """Run the session service."""
    import uvicorn

    try:
        gateway = _build_gateway(provider_mode, fixtures, temperature, endpoint, model)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INPUT)
    Path(data_dir).mkdir(parents=True, exist_ok=True)
    engine = SessionEngine(Path(data_dir), gateway, EngineConfig(variant=GroupingVariant(variant)))
    app = create_app(engine, poll_timeout=poll_timeout)
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
