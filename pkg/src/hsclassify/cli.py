"""Command-line surface: train, predict, evaluate, calibrate, synth.

Exit codes: 0 success, 2 usage or input error, 1 internal error. All
commands are deterministic given the same inputs and seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import click

from .alignment import RetrievalConfig
from .classifier import TrainConfig
from .corpus import chronological_split, load_cases, load_manual
from .errors import HsClassifyError
from .evaluation import evaluate_pipeline
from .pipeline import (
    PipelineConfig,
    fit,
    load_pipeline,
    refit_temperatures,
    save_pipeline,
)
from .synth import SynthConfig, generate, write_corpus
from .textproc import DEFAULT_STOPWORDS, WordVectorTable, load_stopwords


@dataclass
class CliConfig:
    cases: Path
    manual: Path
    vectors: Path
    stopwords: Path | None
    checkpoint_dir: Path
    seed: int
    output_format: str
    validation_months: int
    test_months: int
    pipeline: PipelineConfig


def _load_config(config_path: str | None, seed: int | None, output_format: str | None) -> CliConfig:
    if config_path is None:
        raise click.UsageError("a --config file is required for this command")
    path = Path(config_path)
    if not path.exists():
        raise click.UsageError(f"config file not found: {path}")
    with open(path, encoding="utf-8") as handle:
        try:
            data = json.load(handle)
        except json.JSONDecodeError as exc:
            raise click.UsageError(f"config file {path} is not valid JSON: {exc}")

    base = path.parent

    def resolve(key: str, required: bool = True) -> Path | None:
        value = data.get(key)
        if value is None:
            if required:
                raise click.UsageError(f"config file {path} is missing {key!r}")
            return None
        return base / value

    effective_seed = seed if seed is not None else int(data.get("seed", 0))
    pipeline_options = data.get("pipeline", {})
    heading_train = TrainConfig(**{**data.get("heading_train", {}), "seed": effective_seed})
    subheading_train = TrainConfig(
        **{**data.get("subheading_train", {}), "seed": effective_seed + 1}
    )
    pipeline_config = PipelineConfig(
        heading_train=heading_train,
        subheading_train=subheading_train,
        retrieval=RetrievalConfig(**data.get("retrieval", {})),
        **pipeline_options,
    )
    return CliConfig(
        cases=resolve("cases"),
        manual=resolve("manual"),
        vectors=resolve("vectors"),
        stopwords=resolve("stopwords", required=False),
        checkpoint_dir=resolve("checkpoint_dir"),
        seed=effective_seed,
        output_format=output_format or data.get("format", "text"),
        validation_months=int(data.get("validation_months", 3)),
        test_months=int(data.get("test_months", 3)),
        pipeline=pipeline_config,
    )


def _require_file(path: Path, label: str) -> Path:
    if not path.exists():
        raise click.UsageError(f"{label} file not found: {path}")
    return path


def _load_inputs(config: CliConfig):
    try:
        cases = load_cases(_require_file(config.cases, "cases"))
        manuals = load_manual(_require_file(config.manual, "manual"))
        vectors = WordVectorTable.load(_require_file(config.vectors, "vectors"))
    except HsClassifyError as exc:
        raise click.UsageError(str(exc))
    if config.stopwords is not None:
        stopwords = load_stopwords(_require_file(config.stopwords, "stopwords"))
    else:
        stopwords = DEFAULT_STOPWORDS
    return cases, manuals, vectors, stopwords


@click.group()
@click.option("--config", "config_path", type=str, default=None, help="Path to a JSON config file.")
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.option(
    "--format",
    "output_format",
    type=click.Choice(["text", "structured"]),
    default=None,
    help="Output rendering for predict/evaluate.",
)
@click.pass_context
def main(ctx: click.Context, config_path: str | None, seed: int | None, output_format: str | None):
    """Hierarchical HS-code classification with evidence retrieval."""
    ctx.ensure_object(dict)
    ctx.obj["config_path"] = config_path
    ctx.obj["seed"] = seed
    ctx.obj["format"] = output_format


def _ctx_config(ctx: click.Context) -> CliConfig:
    return _load_config(ctx.obj["config_path"], ctx.obj["seed"], ctx.obj["format"])


@main.command()
@click.option("--no-evidence", is_flag=True, help="Train the stage-3 head on descriptions alone.")
@click.option(
    "--with-ablation",
    is_flag=True,
    help="Additionally train the opposite stage-3 variant for side-by-side evaluation.",
)
@click.pass_context
def train(ctx: click.Context, no_evidence: bool, with_ablation: bool):
    """Fit the full pipeline and write a checkpoint directory."""
    config = _ctx_config(ctx)
    cases, manuals, vectors, stopwords = _load_inputs(config)
    try:
        split = chronological_split(cases, config.validation_months, config.test_months)
    except HsClassifyError as exc:
        raise click.UsageError(str(exc))

    pipeline_config = config.pipeline
    if no_evidence:
        pipeline_config = replace(pipeline_config, use_evidence=False)
    if with_ablation:
        pipeline_config = replace(pipeline_config, train_ablation=True)

    model = fit(split.train, split.validation, manuals, vectors, stopwords, pipeline_config)
    save_pipeline(model, config.checkpoint_dir)

    report = model.fit_report
    click.echo(f"cases: {len(split.train)} train / {len(split.validation)} validation")
    for stage, stage_report in (("heading", report.heading), ("subheading", report.subheading)):
        best = stage_report.best_epoch
        click.echo(
            f"{stage}: best epoch {best + 1}/{len(stage_report.losses)}"
            f"  val top-1 {stage_report.val_accuracies[best]:.4f}"
            f"  loss {stage_report.losses[best]:.4f}"
        )
    if report.ablation is not None:
        best = report.ablation.best_epoch
        click.echo(f"ablation: best epoch {best + 1}  val top-1 {report.ablation.val_accuracies[best]:.4f}")
    if report.missing_manual_cases:
        click.echo(f"warning: {report.missing_manual_cases} cases lack a gold-heading manual entry")
    click.echo(
        f"temperatures: heading {model.heading_scaler.temperature:.4f}"
        f"  subheading {model.subheading_scaler.temperature:.4f}"
    )
    click.echo(f"checkpoint written to {config.checkpoint_dir}")


@main.command()
@click.argument("description", required=False)
@click.option("--input-file", type=str, default=None, help="Read the description from a file.")
@click.option("--top-k", type=int, default=3, show_default=True, help="Candidates per stage.")
@click.pass_context
def predict(ctx: click.Context, description: str | None, input_file: str | None, top_k: int):
    """Render a candidate report for one item description."""
    config = _ctx_config(ctx)
    if input_file is not None:
        path = _require_file(Path(input_file), "description")
        description = path.read_text(encoding="utf-8")
    if description is None or not description.strip():
        raise click.UsageError("provide a non-empty item description (argument or --input-file)")
    try:
        model = load_pipeline(config.checkpoint_dir)
        report = model.predict(description.strip(), k=top_k)
    except HsClassifyError as exc:
        raise click.UsageError(str(exc))
    if config.output_format == "structured":
        click.echo(json.dumps(report.to_dict(), sort_keys=True))
    else:
        click.echo(report.render_text(), nl=False)


@main.command()
@click.option(
    "--output-dir",
    type=str,
    default=None,
    help="Directory for metrics files (defaults to the checkpoint directory).",
)
@click.pass_context
def evaluate(ctx: click.Context, output_dir: str | None):
    """Evaluate the checkpoint on the chronological test split."""
    config = _ctx_config(ctx)
    cases, manuals, _, _ = _load_inputs(config)
    try:
        split = chronological_split(cases, config.validation_months, config.test_months)
        model = load_pipeline(config.checkpoint_dir)
        metrics = evaluate_pipeline(model, split.test, manuals)
    except HsClassifyError as exc:
        raise click.UsageError(str(exc))

    target = Path(output_dir) if output_dir is not None else config.checkpoint_dir
    target.mkdir(parents=True, exist_ok=True)
    with open(target / "metrics.json", "w", encoding="utf-8") as handle:
        json.dump(metrics.to_dict(), handle, sort_keys=True, separators=(",", ":"))
        handle.write("\n")
    table = metrics.render_table()
    (target / "metrics.txt").write_text(table, encoding="utf-8")

    if config.output_format == "structured":
        click.echo(json.dumps(metrics.to_dict(), sort_keys=True))
    else:
        click.echo(table, nl=False)
    click.echo(f"metrics written to {target / 'metrics.json'}")


@main.command()
@click.pass_context
def calibrate(ctx: click.Context):
    """Refit the per-stage temperatures on the validation split."""
    config = _ctx_config(ctx)
    cases, _, _, _ = _load_inputs(config)
    try:
        split = chronological_split(cases, config.validation_months, config.test_months)
        model = load_pipeline(config.checkpoint_dir)
        refit_temperatures(model, list(split.validation))
    except HsClassifyError as exc:
        raise click.UsageError(str(exc))
    save_pipeline(model, config.checkpoint_dir)
    click.echo(
        f"temperatures: heading {model.heading_scaler.temperature:.4f}"
        f"  subheading {model.subheading_scaler.temperature:.4f}"
    )


@main.command()
@click.option("--out-dir", type=str, required=True, help="Directory for the generated corpus.")
@click.option("--headings", type=int, default=20, show_default=True)
@click.option("--subheadings-per-heading", type=int, default=3, show_default=True)
@click.option("--train-per-subheading", type=int, default=50, show_default=True)
@click.option("--validation-per-subheading", type=int, default=5, show_default=True)
@click.option("--test-per-subheading", type=int, default=5, show_default=True)
@click.option("--dimension", type=int, default=50, show_default=True)
@click.pass_context
def synth(
    ctx: click.Context,
    out_dir: str,
    headings: int,
    subheadings_per_heading: int,
    train_per_subheading: int,
    validation_per_subheading: int,
    test_per_subheading: int,
    dimension: int,
):
    """Generate a seeded synthetic corpus plus a ready-to-run config file."""
    seed = ctx.obj["seed"] if ctx.obj["seed"] is not None else 7
    try:
        config = SynthConfig(
            headings=headings,
            subheadings_per_heading=subheadings_per_heading,
            train_per_subheading=train_per_subheading,
            validation_per_subheading=validation_per_subheading,
            test_per_subheading=test_per_subheading,
            vector_dimension=dimension,
            seed=seed,
        )
    except ValueError as exc:
        raise click.UsageError(str(exc))
    corpus = generate(config)
    paths = write_corpus(corpus, out_dir, config)
    click.echo(f"cases:   {paths['cases']}  ({len(corpus.raw_case_records)} records)")
    click.echo(f"manual:  {paths['manual']}  ({len(corpus.manual)} headings)")
    click.echo(f"vectors: {paths['vectors']}  (dim {corpus.vectors.dimension})")
    click.echo(f"config:  {paths['config']}")


if __name__ == "__main__":
    main()
