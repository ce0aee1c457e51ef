"""Command-line entry points."""
from __future__ import annotations

from pathlib import Path

import click

from .errors import RecoveryError
from .experiment import baseline_states, export_qgrids, load_config, run_experiment
from .metrics import error_matrix
from .reference_runs import CASES, reference_config
from .version import __version__


def _threads_option(f):
    return click.option(
        "--threads", type=int, default=1, show_default=True,
        help="Worker count hint; accepted for interface stability, results are "
             "identical for any value.")(f)


def _check_threads(threads: int) -> None:
    if threads < 1:
        raise click.BadParameter("threads must be at least 1", param_hint="--threads")


def _summary_lines(report) -> list:
    records = report.records
    lines = [
        f"report: {Path(report.output_dir) / 'report.json'}",
        f"config hash: {report.config_hash[:12]}",
        f"initial distance: {report.d0:.6f}",
        f"filtering probability: {report.filtering_probability:.6f}",
        f"accepted measurements: {len(records) - 1}",
        f"final distance: {records[-1].distance_after:.6f}",
        f"sequence probability: {records[-1].sequence_probability:.6f}",
    ]
    if report.reduction_factor is not None:
        lines.append(f"reduction factor: {report.reduction_factor:.4f}")
    return lines


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__)
def main():
    """Recover damped cavity-field superpositions with post-selected atom probes."""


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Experiment config file (YAML or JSON).")
@click.option("--out", "out_dir", default=None,
              type=click.Path(file_okay=False, path_type=Path),
              help="Override the configured output directory.")
@_threads_option
def run(config_path: Path, out_dir, threads: int):
    """Run a full recovery experiment and write its artifacts."""
    _check_threads(threads)
    try:
        config = load_config(config_path)
        if out_dir is not None:
            config = config.with_output_dir(out_dir)
        report = run_experiment(config)
    except RecoveryError as exc:
        raise click.ClickException(str(exc)) from exc
    for line in _summary_lines(report):
        click.echo(line)


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Experiment config file (YAML or JSON).")
@click.option("--out", "out_dir", default=None,
              type=click.Path(file_okay=False, path_type=Path),
              help="Override the configured output directory.")
@_threads_option
def qgrid(config_path: Path, out_dir, threads: int):
    """Write phase-space grids for the configured state without optimizing."""
    _check_threads(threads)
    try:
        config = load_config(config_path)
        if out_dir is not None:
            config = config.with_output_dir(out_dir)
        target, damped = baseline_states(config)
        surfaces = {
            "original": target,
            "dissipated": damped,
            "error_dissipated": error_matrix(damped, target),
        }
        paths = export_qgrids(surfaces, config.q_grid, config.output_dir, plots=config.plots)
    except RecoveryError as exc:
        raise click.ClickException(str(exc)) from exc
    for path in paths:
        click.echo(f"wrote {path}")


@main.command("repro-paper")
@click.option("--case", type=click.Choice(CASES + ("all",)), default="all",
              show_default=True, help="Which bundled case to run.")
@click.option("--out", "out_dir", default=Path("reference_runs"), show_default=True,
              type=click.Path(file_okay=False, path_type=Path),
              help="Directory that receives one subdirectory per case.")
@_threads_option
def repro_paper(case: str, out_dir: Path, threads: int):
    """Re-run the bundled reference configurations and print their key numbers."""
    _check_threads(threads)
    names = CASES if case == "all" else (case,)
    for name in names:
        try:
            config = reference_config(name, Path(out_dir) / name)
            report = run_experiment(config)
        except RecoveryError as exc:
            raise click.ClickException(f"case {name}: {exc}") from exc
        click.echo(f"[{name}]")
        for line in _summary_lines(report):
            click.echo(f"  {line}")
        if report.injected:
            entry = report.injected[0]
            click.echo(
                f"  injected reference: probability {entry['probability']:.6f}, "
                f"distance {entry['distance']:.6f}")


if __name__ == "__main__":
    main()
