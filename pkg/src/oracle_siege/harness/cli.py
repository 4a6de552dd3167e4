"""``oracle-siege`` command line: gen-data, run and report."""

from __future__ import annotations

import sys
from pathlib import Path

import click

from ..auth import AuthError, BudgetExhausted, write_enrollment_csv
from ..attack import AttackError
from ..models import TrainingError
from .config import ConfigError, load_config
from .data import InfeasiblePacking
from .experiment import build_world, derive_seed, load_population, run_experiment
from .report import ReportIOError, export_report, load_report, recompute_metrics, summary_text

EXIT_CONFIG, EXIT_FEASIBILITY, EXIT_IO = 2, 3, 4


def _fail(msg: str, code: int):
    click.echo(f"error: {msg}", err=True)
    sys.exit(code)


def _guarded(fn):
    """Map module errors onto the documented exit codes."""
    try:
        return fn()
    except ConfigError as exc:
        _fail(str(exc), EXIT_CONFIG)
    except (InfeasiblePacking, BudgetExhausted, AttackError, TrainingError) as exc:
        _fail(str(exc), EXIT_FEASIBILITY)
    except (ReportIOError, OSError) as exc:
        _fail(str(exc), EXIT_IO)
    except AuthError as exc:
        _fail(str(exc), EXIT_CONFIG)


def _config(config, seed, **overrides):
    cfg = load_config(config)
    try:
        return cfg.with_overrides(seed=seed, **overrides)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


config_option = click.option("--config", type=click.Path(dir_okay=False), default=None,
                             help="TOML or JSON experiment config.")
seed_option = click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=None,
                           help="Master seed (overrides config and ORACLE_SIEGE_SEED).")


@click.group()
def main():
    """Black-box masquerade experiments against simulated authentication oracles."""


@main.command("gen-data")
@config_option
@seed_option
@click.option("--out", type=click.Path(file_okay=False), default="data", show_default=True)
def gen_data(config, seed, out):
    """Write the configured synthetic population as an enrollment CSV."""
    def go():
        cfg = _config(config, seed)
        if cfg.dataset != "synthetic":
            raise ConfigError("gen-data needs dataset = \"synthetic\"")
        seeds = {name: derive_seed(cfg.seed, name) for name in ("data", "basis")}
        data = load_population(cfg, seeds)
        path = Path(out)
        path.mkdir(parents=True, exist_ok=True)
        write_enrollment_csv(path / "enrollment.csv", data)
        click.echo(f"wrote {len(data)} principals x {cfg.samples_each} samples to {path / 'enrollment.csv'}")
    _guarded(go)


@main.command()
@config_option
@seed_option
@click.option("--out", type=click.Path(file_okay=False), default="out", show_default=True)
@click.option("--workers", type=click.IntRange(1), default=None)
@click.option("--attack", type=click.Choice(["baseline", "replay", "random", "quickstart", "quickstart+lime"]),
              default=None)
@click.option("--defense", type=click.Choice(["none", "random", "all"]), default=None)
@click.option("--backend", type=click.Choice(["rf", "svm", "nn"]), default=None)
@click.option("--paradigm", type=click.Choice(["raw", "latent"]), default=None)
@click.option("--budget", type=click.IntRange(1), default=None)
@click.option("--knowledge", type=float, default=None, help="Fraction of usernames the adversary knows.")
@click.option("--traces/--no-traces", default=True, show_default=True, help="Also write traces.jsonl.")
def run(config, seed, out, workers, attack, defense, backend, paradigm, budget, knowledge, traces):
    """Run one experiment and export its report."""
    def go():
        cfg = _config(config, seed, workers=workers, attack=attack, defense=defense,
                      backend=backend, paradigm=paradigm, budget=budget, knowledge=knowledge)
        world = build_world(cfg)
        result = run_experiment(cfg, world)
        export_report(result.matrix, result.metrics, out, extra=result.report(),
                      traces=result.traces if traces else None)
        click.echo(summary_text(result.metrics, result.matrix))
        click.echo(f"report written to {out}")
    _guarded(go)


@main.command()
@click.argument("path", type=click.Path(), default="out")
def report(path):
    """Summarize an exported report and check its metrics against the matrix."""
    def go():
        matrix, metrics, _ = load_report(path)
        click.echo(summary_text(metrics, matrix))
        stored, again = recompute_metrics(path)
        if stored != again:
            click.echo("warning: stored metrics differ from the matrix", err=True)
            sys.exit(1)
    _guarded(go)


if __name__ == "__main__":
    main()
