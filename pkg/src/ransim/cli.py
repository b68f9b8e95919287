"""``ransim`` command line: run one scenario, sweep schedulers x seeds x loads, validate a config."""

from __future__ import annotations

import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import click

from .config import ScenarioSpec, load_config, parse_scheduler, to_toml
from .errors import RanSimError
from .simcore import atomic_write, compare, load_curves, run, series_csv

log = logging.getLogger("ransim")

OUT_ENV = "RANSIM_OUT_DIR"


def _setup_logging(verbose: int):
    level = logging.WARNING - 10 * min(verbose, 2)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def parse_seeds(text: str) -> list[int]:
    """``"0..4"`` (inclusive) or ``"1,3,7"``."""
    text = text.strip()
    try:
        if ".." in text:
            lo, hi = (int(x) for x in text.split("..", 1))
            if hi < lo:
                raise ValueError
            return list(range(lo, hi + 1))
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise click.BadParameter(f"expected N..M or a comma list, got {text!r}") from None


def _run_name(spec: ScenarioSpec) -> str:
    return f"{spec.scheduler.value}_ues{spec.n_ues}_seed{spec.seed}"


@dataclass(frozen=True)
class RunSummary:
    spec: ScenarioSpec
    aggregates: dict
    wall_clock_s: float

    @property
    def scheduler(self) -> str:
        return self.spec.scheduler.value


def execute(spec: ScenarioSpec, out: Path) -> RunSummary:
    """Run one cell and write its report, deployments and latency-CDF files."""
    report = run(spec)
    name = _run_name(spec)
    report.write_csv(out / "reports" / f"{name}.csv")
    atomic_write(out / "deployments" / f"{name}.csv", report.deployments_csv())
    xs, qs = report.latency_cdf()
    atomic_write(out / "plots" / f"latency_cdf_{name}.csv",
                 series_csv({spec.scheduler.value: list(zip(xs, qs))}, "latency_ms", "cdf"))
    return RunSummary(spec, report.aggregates, report.wall_clock_s)


def _cell(args):
    base, scheduler, seed, n_ues, out = args
    try:
        spec = base.replace(scheduler=parse_scheduler(scheduler), seed=seed, n_ues=n_ues).validate()
        return execute(spec, Path(out)), None
    except Exception as exc:  # isolate the cell; reported by the parent
        return None, f"{type(exc).__name__}: {exc}"


def _out_dir(out):
    if out is None:
        raise click.UsageError(f"--out is required (or set {OUT_ENV})")
    return Path(out)


def _load(config) -> ScenarioSpec:
    try:
        return load_config(config) if config else ScenarioSpec()
    except RanSimError as exc:
        raise click.ClickException(f"{type(exc).__name__}: {exc}") from exc


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Slot-level O-RAN orchestration and scheduling simulator."""


@main.command("run")
@click.option("--config", "config", type=click.Path(exists=True, dir_okay=False), help="Scenario TOML.")
@click.option("--out", envvar=OUT_ENV, type=click.Path(file_okay=False), help=f"Output directory (env {OUT_ENV}).")
@click.option("--seed", type=int, default=None)
@click.option("--scheduler", default=None, help="RoundRobin, ProportionalFair, MaxMinFairness, OrchestRAN or alias.")
@click.option("-v", "--verbose", count=True)
def cmd_run(config, out, seed, scheduler, verbose):
    """Run a single scenario and write its report files."""
    _setup_logging(verbose)
    out = _out_dir(out)
    spec = _load(config)
    try:
        if seed is not None:
            spec = spec.replace(seed=seed)
        if scheduler is not None:
            spec = spec.replace(scheduler=parse_scheduler(scheduler))
        summary = execute(spec.validate(), out)
    except RanSimError as exc:
        raise click.ClickException(f"{type(exc).__name__}: {exc}") from exc
    click.echo(f"{_run_name(spec)} ({summary.wall_clock_s:.1f}s)")
    for k, v in summary.aggregates.items():
        click.echo(f"  {k:28s} {v}")


@main.command("sweep")
@click.option("--config", "config", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", envvar=OUT_ENV, type=click.Path(file_okay=False))
@click.option("--schedulers", required=True, help="Comma list, e.g. RR,PF,MMF,OrchestRAN.")
@click.option("--seeds", required=True, help="N..M inclusive or a comma list.")
@click.option("--loads", default=None, help="Comma list of UE counts (default: sweep.n_ues, else n_ues).")
@click.option("--jobs", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("-v", "--verbose", count=True)
def cmd_sweep(config, out, schedulers, seeds, loads, jobs, verbose):
    """Run the scheduler x seed x load product and write a comparison table."""
    _setup_logging(verbose)
    out = _out_dir(out)
    base = _load(config)
    names = [s.strip() for s in schedulers.split(",") if s.strip()]
    seed_list = parse_seeds(seeds)
    if loads:
        load_list = [int(x) for x in loads.split(",")]
    else:
        load_list = list(base.sweep.n_ues) or [base.n_ues]
    if not names or not seed_list:
        raise click.UsageError("need at least one scheduler and one seed")

    cells = [(base, s, seed, n, str(out)) for n in load_list for s in names for seed in seed_list]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_cell, cells))
    else:
        results = [_cell(c) for c in cells]

    ok, failed = [], []
    for cell, (summary, err) in zip(cells, results):
        if err is None:
            ok.append(summary)
            click.echo(f"ok     {_run_name(summary.spec)} ({summary.wall_clock_s:.1f}s)")
        else:
            failed.append(cell)
            click.echo(f"FAILED scheduler={cell[1]} seed={cell[2]} n_ues={cell[3]}: {err}", err=True)

    header = "".join(f"# {ln}\n" for ln in ["base scenario (TOML)"] + to_toml(base).splitlines() if ln)
    header += f"# loads = {','.join(map(str, load_list))}\n"
    sections = []
    for n in load_list:
        group = [s for s in ok if s.spec.n_ues == n]
        if len({s.scheduler for s in group}) >= 2:
            try:
                sections.append(compare(group).to_csv())
            except RanSimError as exc:
                failed.append(("compare", n))
                click.echo(f"FAILED comparison at n_ues={n}: {exc}", err=True)
    if sections:
        atomic_write(out / "comparison.csv", header + "\n".join(sections))
    if ok:
        curves = load_curves(ok)
        atomic_write(out / "plots" / "se_vs_load.csv", series_csv(curves["mean_se"], "n_ues", "mean_se"))
        atomic_write(out / "plots" / "latency_vs_load.csv",
                     series_csv(curves["mean_latency_ms"], "n_ues", "mean_latency_ms"))
    click.echo(f"{len(ok)} of {len(cells)} runs completed; output in {out}")
    sys.exit(1 if failed else 0)


@main.command("validate")
@click.option("--config", "config", type=click.Path(exists=True, dir_okay=False), required=True)
def cmd_validate(config):
    """Check a config (including a 10-slot dry run) and print the effective spec."""
    spec = _load(config)
    try:
        spec.validate()
        run(spec.replace(n_slots=10, warmup_slots=0))
    except RanSimError as exc:
        raise click.ClickException(f"{type(exc).__name__}: {exc}") from exc
    click.echo(to_toml(spec), nl=False)


if __name__ == "__main__":
    main()
