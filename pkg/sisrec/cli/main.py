"""Main CLI entry point for sisrec."""

import json
import sys
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path
from typing import Any, NoReturn, TypeVar

import click
import pydantic
from rich.console import Console

from sisrec.__version__ import __version__
from sisrec.cli.output import OutputFormatter
from sisrec.cli.validators import InputValidator
from sisrec.exceptions import ExportError, SisrecError, ValidationError, WindowError

console = Console(stderr=True)

ModelT = TypeVar("ModelT", bound=pydantic.BaseModel)


class SisrecGroup(click.Group):
    """Command group whose usage errors exit with status 1."""

    def invoke(self, ctx: click.Context) -> Any:
        try:
            return super().invoke(ctx)
        except click.UsageError as e:
            e.exit_code = 1
            raise


def _fail(output: OutputFormatter, message: str, details: str | None = None) -> NoReturn:
    output.display_error(message, details)
    sys.exit(1)


def _check(output: OutputFormatter, outcome: tuple[bool, str]) -> None:
    ok, message = outcome
    if not ok:
        _fail(output, message)


@contextmanager
def _handle_errors(output: OutputFormatter) -> Iterator[None]:
    """Map library errors to exit status 1 with a readable message."""
    try:
        yield
    except (ValidationError, WindowError, ExportError) as e:
        _fail(output, e.message, json.dumps(e.details) if e.details else None)
    except SisrecError as e:
        output.display_error_panel(type(e).__name__, e.message)
        sys.exit(1)


def _load(model: type[ModelT], path: Path) -> ModelT:
    """Read a JSON file into a pydantic model."""
    try:
        return model.model_validate_json(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise ExportError(str(path), f"Cannot read input: {e}") from e
    except pydantic.ValidationError as e:
        raise ValidationError(
            f"Invalid {model.__name__} in '{path}'", {"errors": e.error_count()}
        ) from e


def _emit(payload: pydantic.BaseModel, out: Path | None) -> None:
    """Write JSON to ``out`` or, without a path, to stdout."""
    text = payload.model_dump_json(indent=2)
    if out is None:
        click.echo(text)
        return
    try:
        out.write_text(text + "\n", encoding="utf-8")
    except OSError as e:
        raise ExportError(str(out), f"Cannot write output: {e}") from e


@click.group(cls=SisrecGroup)
@click.version_option(version=__version__, prog_name="sisrec")
@click.option(
    "--log-level",
    type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"], case_sensitive=False),
    default=None,
    help="Override SISREC_LOG_LEVEL",
)
@click.pass_context
def cli(ctx: click.Context, log_level: str | None) -> None:
    """
    sisrec: estimation and detection in shift-invariant subspaces.

    Build reproducing filters, denoise and test observations of signals that
    satisfy an unknown order-s linear recurrence, and run Monte Carlo risk
    experiments.
    """
    from sisrec.config.settings import get_settings
    from sisrec.observability.logging import configure_logging

    ctx.ensure_object(dict)
    settings = get_settings()
    if log_level:
        settings = settings.model_copy(update={"log_level": log_level.upper()})
    configure_logging(settings)
    ctx.obj["settings"] = settings


@cli.command()
@click.option("--spec", "spec_path", type=Path, required=True, help="Root multiset JSON")
@click.option("--n", "N", type=click.IntRange(min=0), required=True, help="Observed half-width N")
@click.option("--sigma", type=click.FloatRange(min=0.0), default=0.0, show_default=True)
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--coeffs", "coeffs_path", type=Path, default=None, help="Basis coefficients JSON")
@click.option("--normalize", is_flag=True, help="Scale the signal to unit windowed norm")
@click.option("--out", type=Path, default=None, help="Observation JSON (stdout if omitted)")
def synth(
    spec_path: Path,
    N: int,
    sigma: float,
    seed: int,
    coeffs_path: Path | None,
    normalize: bool,
    out: Path | None,
) -> None:
    """
    Synthesize noisy observations of a subspace member on [-N, N].

    Without --coeffs the basis coefficients are drawn at random from the
    seed. The clean signal is stored under "clean".
    """
    import numpy as np

    from sisrec.core.signal import add_noise, random_member, synthesize
    from sisrec.harness.monte_carlo import mix_seed
    from sisrec.schemas import CoefficientPayload, SignalPayload, SisSpecPayload

    output = OutputFormatter(console)
    _check(output, InputValidator.validate_input_file(spec_path))
    if coeffs_path is not None:
        _check(output, InputValidator.validate_input_file(coeffs_path))
    if out is not None:
        _check(output, InputValidator.validate_output_path(out))

    with _handle_errors(output):
        spec = _load(SisSpecPayload, spec_path).to_spec()
        if coeffs_path is None:
            x = random_member(spec, -N, N, np.random.default_rng(mix_seed(seed, 1)))
        else:
            coeffs = _load(CoefficientPayload, coeffs_path).as_array()
            x = synthesize(spec, coeffs, -N, N)
        if normalize:
            norm = float(np.linalg.norm(x.values))
            if norm > 0:
                x = x.scaled(1.0 / norm)
        y = add_noise(x, N, sigma, mix_seed(seed, 2))
        _emit(SignalPayload.from_sequence(y.y, N, sigma, clean=x), out)
    if out is not None:
        output.display_success(f"Wrote observations on [-{N}, {N}] to {out}")


@cli.command()
@click.option("--spec", "spec_path", type=Path, required=True, help="Root multiset JSON")
@click.option("--m", type=click.IntRange(min=0), required=True, help="Filter parameter m")
@click.option("--causal", is_flag=True, help="Build the one-sided filter")
@click.option("--c1", type=click.FloatRange(min=0.0), default=None, help="Causal budget constant")
@click.option("--out", type=Path, default=None, help="Filter JSON (stdout if omitted)")
def oracle(spec_path: Path, m: int, causal: bool, c1: float | None, out: Path | None) -> None:
    """
    Construct the hybrid reproducing filter of a known subspace.

    The output carries the filter coefficients and a "certificates" block
    with the three spectrum norms scaled by sqrt(2n+1).
    """
    from sisrec.schemas import FilterPayload, SisSpecPayload
    from sisrec.services.filter_oracle import build_hybrid_filter, build_hybrid_filter_causal

    output = OutputFormatter(console)
    _check(output, InputValidator.validate_input_file(spec_path))
    if out is not None:
        _check(output, InputValidator.validate_output_path(out))

    with _handle_errors(output):
        spec = _load(SisSpecPayload, spec_path).to_spec()
        if causal:
            result = build_hybrid_filter_causal(spec, m, c1)
        else:
            result = build_hybrid_filter(spec, m)
        payload = FilterPayload(
            lo=result.phi.lo,
            re=result.phi.values.real.tolist(),
            im=result.phi.values.imag.tolist(),
            m=m,
            causal=causal,
            certificates=result.certificate.as_dict(),
            support_size=len(result.support),
            interpolation_error=result.interpolation_error,
            interpolant_sup=result.interpolant_sup,
            interpolant_weights=result.interpolant_weights,
        )
        _emit(payload, out)
    output.display_certificates(payload)


@cli.command()
@click.option("--input", "input_path", type=Path, required=True, help="Observation JSON")
@click.option("--s", type=click.IntRange(min=1), required=True, help="Subspace order")
@click.option(
    "--mode",
    type=click.Choice(["core", "full", "causal"]),
    default="core",
    show_default=True,
)
@click.option("--delta", type=float, default=0.1, show_default=True, help="Confidence level")
@click.option("--solver-tol", type=float, default=None, help="Override SISREC_SOLVER_TOL")
@click.option("--max-iter", type=click.IntRange(min=1), default=None, help="Iteration cap")
@click.option("--lead", type=click.IntRange(min=0), default=0, help="Prediction lead (causal)")
@click.option("--out", type=Path, default=None, help="Estimate JSON (stdout if omitted)")
def denoise(
    input_path: Path,
    s: int,
    mode: str,
    delta: float,
    solver_tol: float | None,
    max_iter: int | None,
    lead: int,
    out: Path | None,
) -> None:
    """
    Estimate the signal from noisy observations.

    core scores [-n, n] from data on [-2n, 2n]; full covers the whole window;
    causal estimates the right half-window from past samples only.
    """
    from sisrec.schemas import EstimatePayload, SignalPayload
    from sisrec.services.estimator import core_risk_bound, full_risk_bound, timed_estimate
    from sisrec.services.solver import SolverConfig

    output = OutputFormatter(console)
    _check(output, InputValidator.validate_input_file(input_path))
    _check(output, InputValidator.validate_delta(delta))
    if out is not None:
        _check(output, InputValidator.validate_output_path(out))

    with _handle_errors(output):
        y = _load(SignalPayload, input_path).to_observation()
        _check(output, InputValidator.validate_order(mode, y.N, s))
        config = SolverConfig.from_settings(tol=solver_tol, max_iter=max_iter)
        with output.create_progress_context(f"Fitting {mode} estimator"):
            result = timed_estimate(mode, y, s, config=config, lead=lead)
        n = y.N // 2
        bound = None
        if mode == "core":
            bound = core_risk_bound(s, n, y.sigma, delta)
        elif mode == "full":
            bound = full_risk_bound(s, n, y.sigma, delta)
        payload = EstimatePayload.from_result(result.x_hat, result.fits, mode, bound)
        _emit(payload, out)
    output.display_estimate(payload)
    if not payload.converged:
        output.display_warning("Solver stopped at the iteration cap")


@cli.command()
@click.option("--input", "input_path", type=Path, required=True, help="Observation JSON")
@click.option("--s", type=click.IntRange(min=1), required=True, help="Subspace order")
@click.option("--sigma", type=click.FloatRange(min=0.0), default=None, help="Noise level")
@click.option("--delta", type=float, default=0.1, show_default=True, help="Error probability")
def detect(input_path: Path, s: int, sigma: float | None, delta: float) -> None:
    """
    Test for the presence of an s-dimensional signal.

    Prints {statistic, threshold, reject} as JSON. The noise level defaults
    to the one stored with the observations.
    """
    from sisrec.schemas import SignalPayload
    from sisrec.services.detection import detect as run_detect
    from sisrec.services.solver import SolverConfig

    output = OutputFormatter(console)
    _check(output, InputValidator.validate_input_file(input_path))
    _check(output, InputValidator.validate_delta(delta))

    with _handle_errors(output):
        y = _load(SignalPayload, input_path).to_observation()
        _check(output, InputValidator.validate_order("full", y.N, s))
        level = y.sigma if sigma is None else sigma
        with output.create_progress_context("Running full-window estimate"):
            result = run_detect(y, s, level, delta, SolverConfig.from_settings())
    click.echo(json.dumps(result.model_dump(include={"statistic", "threshold", "reject"})))
    output.display_detection(result)


@cli.command()
@click.option("--config", "config_path", type=Path, required=True, help="BenchConfig JSON")
@click.option("--out", type=Path, default=None, help="CSV of per-trial records")
@click.option("--json", "json_path", type=Path, default=None, help="Full report as JSON")
@click.option("--threads", type=click.IntRange(min=1), default=None, help="Override SISREC_THREADS")
def bench(
    config_path: Path, out: Path | None, json_path: Path | None, threads: int | None
) -> None:
    """
    Run a Monte Carlo risk or detection experiment.

    The CSV path defaults to the config's out_path; without either, only the
    summary table is shown.
    """
    from sisrec.harness.export import export_csv, export_json
    from sisrec.harness.monte_carlo import run_detection_trials, run_monte_carlo
    from sisrec.schemas import BenchConfig
    from sisrec.services.solver import SolverConfig

    output = OutputFormatter(console)
    _check(output, InputValidator.validate_input_file(config_path))

    with _handle_errors(output):
        config = _load(BenchConfig, config_path)
        csv_path = out if out is not None else (Path(config.out_path) if config.out_path else None)
        for path in (csv_path, json_path):
            if path is not None:
                _check(output, InputValidator.validate_output_path(path))

        total = config.trials * len(config.n_list) * len(config.s_list)
        runner = run_detection_trials if config.task == "detection" else run_monte_carlo
        with output.create_progress_context(f"{config.task} trials", total) as progress:
            task_id = progress.task_ids[0]
            report = runner(
                config,
                SolverConfig.from_settings(),
                threads,
                lambda done, _total: progress.update(task_id, completed=done),
            )
        if csv_path is not None:
            export_csv(report, csv_path)
            output.display_success(f"Wrote {len(report.records)} records to {csv_path}")
        if json_path is not None:
            export_json(report, json_path)
            output.display_success(f"Wrote report to {json_path}")
    output.display_risk_report(report)
    if report.failures:
        output.display_warning(f"{report.failures} trial(s) failed; see the log for details")


@cli.command()
@click.option(
    "--sizes",
    type=click.Choice(["small", "default"]),
    default="default",
    show_default=True,
    help="Instance sizes",
)
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--json", "as_json", is_flag=True, help="Print results as JSON on stdout")
def check(sizes: str, seed: int, as_json: bool) -> None:
    """
    Evaluate the numerical inequalities behind the estimators.

    Exits with status 2 when any check fails.
    """
    from sisrec.harness.theory_checks import theory_checks

    output = OutputFormatter(console)
    with _handle_errors(output):
        with output.create_progress_context("Running inequality checks"):
            results = theory_checks(sizes, seed)  # type: ignore[arg-type]
    if as_json:
        click.echo(json.dumps([r.model_dump() for r in results], indent=2))
    output.display_checks(results)
    if not all(r.passed for r in results):
        sys.exit(2)


if __name__ == "__main__":
    cli()
