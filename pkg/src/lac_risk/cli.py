"""Command-line interface for LAC experiments."""
import logging
import sys
from pathlib import Path
from typing import NoReturn, Optional

try:
    import click
except ImportError:
    print("Error: click is required. Install with: pip install click")
    sys.exit(1)

from lac_risk.core import LacError
from lac_risk.data import load_csv, load_scenario, save_scenario
from lac_risk.experiments import (
    DEFAULT_SWEEP_VALUES,
    RESULTS_FILE,
    SWEEP_AXES,
    ExperimentConfig,
    load_config,
    make_source,
    parse_sweep_values,
    read_results,
    run_experiment,
    run_sweep,
    summarize,
)
from lac_risk.mpe import theta_curve
from lac_risk.report import format_metrics, format_summary_table, format_theta_curve, generate_results_html


def _fail(message: str) -> NoReturn:
    click.echo(f"Error: {message}", err=True)
    sys.exit(1)


def _config(ctx: click.Context, extra: Optional[dict[str, str]] = None) -> ExperimentConfig:
    overrides = dict(ctx.obj["overrides"])
    overrides.update(extra or {})
    try:
        return load_config(ctx.obj["config_path"], overrides)
    except (LacError, OSError) as e:
        _fail(str(e))


@click.group()
@click.option(
    "--config",
    "config_path",
    type=click.Path(path_type=Path),
    help="Experiment config file (key = value lines)",
)
@click.option("--seed", type=int, help="Base seed (overrides the config)")
@click.option("--out", type=click.Path(path_type=Path), help="Output directory (overrides the config)")
@click.option("--jobs", type=int, help="Parallel worker processes for seeds")
@click.option("--verbose", "-v", count=True, help="Log progress (-v info, -vv debug)")
@click.pass_context
def cli(
    ctx: click.Context,
    config_path: Optional[Path],
    seed: Optional[int],
    out: Optional[Path],
    jobs: Optional[int],
    verbose: int,
) -> None:
    """Learning with augmented classes - risk estimators and experiments."""
    ctx.ensure_object(dict)
    ctx.obj["config_path"] = config_path
    overrides: dict[str, str] = {}
    if seed is not None:
        overrides["seed"] = str(seed)
    if out is not None:
        overrides["out"] = str(out)
    if jobs is not None:
        overrides["jobs"] = str(jobs)
    ctx.obj["overrides"] = overrides
    ctx.obj["verbose"] = verbose

    if verbose:
        logging.basicConfig(
            level=logging.DEBUG if verbose > 1 else logging.INFO,
            format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        )


@cli.command()
@click.pass_context
def gen(ctx: click.Context) -> None:
    """Generate a scenario and write labeled/unlabeled/test CSVs plus meta.json."""
    config = _config(ctx)
    try:
        scenario = make_source(config).build(config.seed)
        directory = save_scenario(scenario, config.out)
    except (LacError, OSError) as e:
        _fail(str(e))

    click.echo(f"Scenario written to: {directory}")
    click.echo(f"Labeled:   {scenario.labeled.n}")
    click.echo(f"Unlabeled: {scenario.unlabeled.n}")
    click.echo(f"Test:      {scenario.test.n}")
    click.echo(f"theta_true={scenario.theta_true!r}")


@cli.command("estimate-theta")
@click.option("--labeled", type=click.Path(path_type=Path), help="CSV with labeled (known-class) rows")
@click.option("--unlabeled", type=click.Path(path_type=Path), help="CSV with unlabeled rows")
@click.option("--label-column", default=None, help="Label column to drop from the feature CSVs")
@click.option(
    "--scenario",
    "scenario_dir",
    type=click.Path(path_type=Path),
    help="Scenario directory written by 'lac gen' (instead of --labeled/--unlabeled)",
)
@click.option("--bandwidth", default=None, help="Kernel bandwidth: a number, 'median' or 'median:scale'")
@click.pass_context
def estimate_theta_cmd(
    ctx: click.Context,
    labeled: Optional[Path],
    unlabeled: Optional[Path],
    label_column: Optional[str],
    scenario_dir: Optional[Path],
    bandwidth: Optional[str],
) -> None:
    """Estimate the known-class proportion of the unlabeled sample."""
    config = _config(ctx, {"mpe.bandwidth": bandwidth} if bandwidth else None)

    try:
        if scenario_dir is not None:
            scenario = load_scenario(scenario_dir)
            labeled_x, unlabeled_x = scenario.labeled.features, scenario.unlabeled.features
        elif labeled is not None and unlabeled is not None:
            labeled_x = load_csv(labeled, label_column).features
            unlabeled_x = load_csv(unlabeled, _present_column(unlabeled, label_column)).features
        else:
            _fail("give --scenario or both --labeled and --unlabeled")
        estimate = theta_curve(labeled_x, unlabeled_x, config.kernel_config())
    except (LacError, OSError) as e:
        _fail(str(e))

    click.echo(format_theta_curve(estimate))


def _present_column(path: Path, column: Optional[str]) -> Optional[str]:
    """Unlabeled files may or may not carry the label column."""
    if column is None:
        return None
    with open(path, encoding="utf-8") as f:
        header = f.readline().strip().split(",")
    return column if column in [h.strip() for h in header] else None


@cli.command()
@click.option("--method", "-m", "methods", multiple=True, help="Method to run (repeatable)")
@click.option("--theta-hat", type=float, help="Use this theta instead of estimating it")
@click.option("--repeat", type=int, help="Number of seeds")
@click.option("--scenario", "scenario_dir", type=click.Path(path_type=Path), help="Scenario directory to train on")
@click.option("--no-artifacts", is_flag=True, help="Skip checkpoints and history CSVs")
@click.pass_context
def train(
    ctx: click.Context,
    methods: tuple[str, ...],
    theta_hat: Optional[float],
    repeat: Optional[int],
    scenario_dir: Optional[Path],
    no_artifacts: bool,
) -> None:
    """Train and evaluate methods over repeated seeds."""
    extra: dict[str, str] = {}
    if methods:
        extra["methods"] = ",".join(methods)
    if theta_hat is not None:
        extra["risk.theta_hat"] = repr(theta_hat)
    if repeat is not None:
        extra["repeat"] = str(repeat)
    if scenario_dir is not None:
        extra["scenario.dir"] = str(scenario_dir)
    config = _config(ctx, extra)

    click.echo(f"Running {', '.join(config.methods)} over {config.repeat} seed(s)")
    try:
        outcome = run_experiment(config, config.out, save_artifacts=not no_artifacts)
    except (LacError, OSError) as e:
        _fail(str(e))

    if ctx.obj["verbose"]:
        for line in outcome.lines:
            click.echo(format_metrics(line))
    click.echo(format_summary_table(outcome.summary))
    click.echo(f"\nResults: {config.out / RESULTS_FILE}")
    if outcome.failed:
        click.echo(f"{outcome.failed} run(s) failed", err=True)
        sys.exit(1)


@cli.command()
@click.option("--axis", required=True, type=click.Choice(SWEEP_AXES), help="Hyper-parameter to sweep")
@click.option("--values", default=None, help="Comma list or start:stop:step (defaults per axis)")
@click.option("--method", "-m", "methods", multiple=True, help="Method to run (repeatable)")
@click.option("--repeat", type=int, help="Number of seeds per value")
@click.option("--no-artifacts", is_flag=True, help="Skip checkpoints and history CSVs")
@click.pass_context
def sweep(
    ctx: click.Context,
    axis: str,
    values: Optional[str],
    methods: tuple[str, ...],
    repeat: Optional[int],
    no_artifacts: bool,
) -> None:
    """Run train/evaluate once per value of one hyper-parameter."""
    extra: dict[str, str] = {}
    if methods:
        extra["methods"] = ",".join(methods)
    if repeat is not None:
        extra["repeat"] = str(repeat)
    config = _config(ctx, extra)

    try:
        if values is not None:
            grid = parse_sweep_values(values)
        elif axis in DEFAULT_SWEEP_VALUES:
            grid = DEFAULT_SWEEP_VALUES[axis]
        else:
            _fail(f"--values is required for axis {axis}")
        outcome = run_sweep(config, axis, grid, config.out, save_artifacts=not no_artifacts)
    except (LacError, ValueError, OSError) as e:
        _fail(str(e))

    click.echo(format_summary_table(outcome.summary))
    click.echo(f"\nCurve: {config.out / f'sweep_{axis}.csv'}")
    if outcome.failed:
        click.echo(f"{outcome.failed} run(s) failed", err=True)
        sys.exit(1)


@cli.command()
@click.argument("results_dir", type=click.Path(path_type=Path))
@click.option("--html", "html_path", type=click.Path(path_type=Path), help="Also write an HTML report here")
def report(results_dir: Path, html_path: Optional[Path]) -> None:
    """Summarize results.jsonl: mean +- std per method, best flagged."""
    path = results_dir / RESULTS_FILE if results_dir.is_dir() else results_dir
    try:
        lines, skipped = read_results(path)
    except OSError as e:
        _fail(str(e))

    if not lines:
        _fail(f"no result lines in {path}")
    if skipped:
        click.echo(f"Warning: skipped {skipped} malformed line(s)", err=True)

    rows = summarize(lines)
    click.echo(format_summary_table(rows, skipped))

    if html_path is not None:
        written = generate_results_html(rows, lines, html_path, source=str(path), skipped=skipped)
        click.echo(f"\nHTML report: {written.absolute()}")


def main() -> None:
    cli(obj={})


if __name__ == "__main__":
    main()
