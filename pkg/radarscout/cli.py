import glob
import json
import logging
import os
import sys
import time

import click

from . import experiments, plots, utils
from .config import ConfigError, Settings
from .core import PlannerWeights
from .report import ReportBuilder

log = logging.getLogger("radarscout")

EXIT_CONFIG = 10
EXIT_MISSION = 20


def parse_weights(ctx, param, value):
    if not value:
        return ()
    values = [value] if isinstance(value, str) else list(value)
    weights = []
    for text in values:
        try:
            weights.append(PlannerWeights(*(float(part) for part in text.split(","))))
        except (TypeError, ValueError) as exc:
            raise click.BadParameter("'{}' is not an alpha_e,alpha_u,alpha_s triple ({})".format(text, exc))
    return tuple(weights)


def experiment_options(func):
    for option in reversed([
        click.option("-s", "--scenarios", default=20, show_default=True, help="Number of random scenarios (50 for full scale)"),
        click.option("--seed", default=0, show_default=True, help="Seed of the first scenario; scenario i uses seed + i"),
        click.option("-o", "--output-dir", type=click.Path(), default="results", show_default=True, help="Directory for tables, logs and figures"),
        click.option("-j", "--jobs", default=1, show_default=True, help="Missions to run in parallel"),
        click.option("--no-plots", is_flag=True, help="Skip figure rendering"),
    ]):
        func = option(func)
    return func


# pylama:ignore=C901
@click.group()
@click.option("-c", "--config-file", type=click.File(), help="Load settings from a JSON file rather than a URL")
@click.option("--config-url", envvar="RADARSCOUT_CONFIG_URL", help="URL to download JSON settings from")
@click.option(
    "-n",
    "--max-attempts",
    default=10,
    help="Retry up to N times on failure when downloading settings from a url",
)
@click.option("-v", "--verbose", count=True, help="Provide more detailed output")
@click.option("-q", "--quiet", is_flag=True, help="Silences all output")
@click.pass_context
def cli(ctx, config_file, config_url, max_attempts, verbose, quiet):
    level = logging.WARNING
    if verbose:
        valid_levels = [logging.INFO, logging.DEBUG]
        try:
            level = valid_levels[verbose - 1]
            # Ignore urllib3 and matplotlib DEBUG messages
            logging.getLogger("urllib3").setLevel(logging.WARNING)
            logging.getLogger("matplotlib").setLevel(logging.WARNING)
        except IndexError:
            level = logging.DEBUG
    if quiet:
        level = logging.ERROR
    logging.basicConfig(level=level)

    if config_file and config_url:
        log.debug("Config file '{}' specified, preferring over config url.".format(config_file.name))
    ctx.obj = utils.DictAttributes(
        config_file=config_file,
        config_url=config_url,
        max_attempts=max_attempts,
        quiet=quiet,
    )


def fetch_settings(config_url, max_attempts):
    attempt = 1
    while True:
        try:
            return Settings.load_url(config_url)
        except ConfigError:
            raise
        except Exception as exc:
            if attempt == max(max_attempts, 1):
                raise ConfigError("Could not fetch settings from {}: {}".format(config_url, exc))
            attempt += 1
            delay = 2 ** min(attempt, 7)
            log.error("Caught unexpected exception ('{}'), retrying in {} seconds...".format(exc, delay))
            time.sleep(delay)


def load_settings(obj):
    try:
        if obj.config_file:
            return Settings.load(obj.config_file)
        if obj.config_url:
            return fetch_settings(obj.config_url, obj.max_attempts)
        return Settings()
    except ValueError as exc:
        if not obj.quiet:
            click.echo("Invalid settings: {}".format(exc), err=True)
        sys.exit(EXIT_CONFIG)


def build_spec(obj, kind, settings_updates=None, **kwargs):
    settings = load_settings(obj)
    try:
        if settings_updates:
            settings = settings.replace(**settings_updates)
        if not kwargs.get("weights"):
            kwargs["weights"] = (settings.weights,)
        return experiments.ExperimentSpec(kind=kind, settings=settings, **kwargs)
    except ValueError as exc:
        if not obj.quiet:
            click.echo("Invalid experiment: {}".format(exc), err=True)
        sys.exit(EXIT_CONFIG)


def try_run(obj, spec, no_plots=False):
    result = experiments.run_experiment(spec)
    result_dir = os.path.join(spec.output_dir, spec.kind)
    ReportBuilder(result, spec).run(result_dir)
    files = [] if no_plots else plots.render(result, os.path.join(result_dir, "figures"))
    if not obj.quiet:
        click.echo("{} results written to '{}' ({} figures)".format(spec.kind, result_dir, len(files)))
    if result.errors:
        if not obj.quiet:
            click.echo("{} of {} missions errored".format(len(result.errors), len(result.runs)), err=True)
        sys.exit(EXIT_MISSION)
    return result


@cli.command()
@experiment_options
@click.option("--divisions", default=6, show_default=True, help="Simplex grid divisions")
@click.option("-w", "--weights", multiple=True, callback=parse_weights, help="Explicit alpha_e,alpha_u,alpha_s triples instead of the grid")
@click.pass_obj
def ternary(obj, scenarios, seed, output_dir, jobs, no_plots, divisions, weights):
    """Success rate over a grid of objective weights."""
    weights = weights or tuple(experiments.simplex_grid(divisions))
    spec = build_spec(obj, "ternary", scenarios=scenarios, seed=seed, output_dir=output_dir, jobs=jobs, weights=weights)
    try_run(obj, spec, no_plots)


@cli.command()
@experiment_options
@click.option("-w", "--weights", callback=parse_weights, help="alpha_e,alpha_u,alpha_s triple for our planner")
@click.pass_obj
def baseline(obj, scenarios, seed, output_dir, jobs, no_plots, weights):
    """Our planner against the lawnmower sweep on paired scenarios."""
    spec = build_spec(obj, "baseline", scenarios=scenarios, seed=seed, output_dir=output_dir, jobs=jobs, weights=weights)
    try_run(obj, spec, no_plots)


@cli.command()
@experiment_options
@click.option("-a", "--agents", "agent_counts", multiple=True, type=int, default=(5, 10, 20), show_default=True, help="Low-priority agent counts")
@click.option("-w", "--weights", callback=parse_weights, help="alpha_e,alpha_u,alpha_s triple")
@click.pass_obj
def agents(obj, scenarios, seed, output_dir, jobs, no_plots, agent_counts, weights):
    """Time to path against the number of low-priority agents."""
    spec = build_spec(
        obj, "agent_sweep", scenarios=scenarios, seed=seed, output_dir=output_dir, jobs=jobs,
        weights=weights, agent_counts=tuple(sorted(agent_counts)),
    )
    try_run(obj, spec, no_plots)


@cli.command()
@experiment_options
@click.option("--covariance-scale", type=float, help="Multiply every belief covariance (0 makes the constraint deterministic)")
@click.pass_obj
def calibrate(obj, scenarios, seed, output_dir, jobs, no_plots, covariance_scale):
    """Ground-truth detection along dispatched chance-constrained paths."""
    updates = {"uncertainty": {"covariance_scale": covariance_scale}} if covariance_scale is not None else None
    spec = build_spec(obj, "calibration", updates, scenarios=scenarios, seed=seed, output_dir=output_dir, jobs=jobs)
    try_run(obj, spec, no_plots)


@cli.command()
@click.option("--seed", default=0, show_default=True, help="Scenario seed")
@click.option("-m", "--mode", type=click.Choice(["ours", "lawnmower"]), default="ours", show_default=True)
@click.option("-a", "--agents", "n_agents", type=int, help="Low-priority agent count")
@click.option("-o", "--output-dir", type=click.Path(), default="results", show_default=True)
@click.option("--no-plots", is_flag=True, help="Skip figure rendering")
@click.pass_obj
def single(obj, seed, mode, n_agents, output_dir, no_plots):
    """Run one mission and keep its full log."""
    updates = {"scenario": {"n_agents": n_agents}} if n_agents else None
    spec = build_spec(obj, "single", updates, scenarios=1, seed=seed, output_dir=output_dir, mode=mode)
    result = try_run(obj, spec, no_plots)
    if not obj.quiet:
        run = result.runs[0]
        click.echo("found={} t_found={} log={}".format(run["found"], run["t_found"], run["log"]))


@cli.command()
@click.option("-o", "--output-dir", type=click.Path(), default="results", show_default=True)
@click.pass_obj
def render(obj, output_dir):
    """Re-render figures from the manifests under the output directory."""
    manifests = sorted(glob.glob(os.path.join(output_dir, "*", "manifest.json")))
    if not manifests:
        log.warning("No results found under '{}'".format(output_dir))
    files = []
    for path in manifests:
        with open(path) as fp:
            result = experiments.ExperimentResult.from_dict(json.load(fp)["result"])
        files.extend(plots.render(result, os.path.join(os.path.dirname(path), "figures")))
    if not obj.quiet:
        click.echo("Rendered {} figures".format(len(files)))
