import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Annotated, Any, Callable, Dict, List, Optional, Tuple

import typer
from pydantic import ValidationError
from rich.console import Console

from core.config import VERSION, load_key_value_file, settings
from core.exceptions import InputError, SolverError
from core.logger import configure_logging
from api.v1.hankel.repository import GeneratorRepository
from api.v1.hankel.schema import make_shape
from api.v1.irls.domain import IrlsDomain
from api.v1.irls.repository import IrlsRepository
from api.v1.irls.schema import SolverConfig
from api.v1.spectral.repository import SpectralRepository
from api.v1.spectral.schema import SamplingOperator
from api.v1.frequency.domain import FrequencyDomain
from api.v1.frequency.repository import FrequencyRepository
from api.v1.experiment.domain import ExperimentDomain
from api.v1.experiment.repository import ExperimentRepository
from api.v1.experiment.schema import ExperimentConfig, SNR_METHODS

logger = logging.getLogger(__name__)

app = typer.Typer(
    help="Structured harmonic-mean IRLS for Hankel completion, denoising and frequency estimation.",
    no_args_is_help=True,
    add_completion=False,
)
experiment_app = typer.Typer(help="Reproducible experiment grids written as CSV.", no_args_is_help=True)
app.add_typer(experiment_app, name="experiment")

console = Console(stderr=True)

# desk-scale grids; --full-grid switches to the complete ones
DESK_R_VALUES = list(range(1, 21))
DESK_M_VALUES = list(range(2, 61))
FULL_R_VALUES = list(range(1, 31))
FULL_M_VALUES = list(range(2, 128))
DEFAULT_SNR_VALUES = [float("inf"), 30.0, 25.0, 20.0, 15.0, 10.0, 5.0, 0.0]

ConfigOpt = Annotated[Optional[Path], typer.Option("--config", help="key=value file; flags override its values.")]
NOpt = Annotated[Optional[int], typer.Option("--n", help="Generator length.")]
D1Opt = Annotated[Optional[int], typer.Option("--d1", help="Hankel rows (default n // 2 + 1).")]
RankOpt = Annotated[Optional[int], typer.Option("--rank", help="Target rank R (model order r).")]
LambdaOpt = Annotated[Optional[str], typer.Option("--lambda", help="<value>, 'adaptive' or 'exact'.")]
AlphaOpt = Annotated[Optional[float], typer.Option("--alpha", help="Epsilon decay base in (0, 1).")]
TolOpt = Annotated[Optional[float], typer.Option("--tol", help="Relative iterate-change tolerance.")]
MaxOuterOpt = Annotated[Optional[int], typer.Option("--max-outer", help="Maximum IRLS iterations.")]
SeedOpt = Annotated[Optional[int], typer.Option("--seed", help="Master seed.")]
OutOpt = Annotated[Optional[Path], typer.Option("--out", help="Output CSV (stdout when absent).")]
TrialsOpt = Annotated[Optional[int], typer.Option("--trials", help="Trials per grid cell.")]
WorkersOpt = Annotated[Optional[int], typer.Option("--workers", help="Worker processes.")]


@contextmanager
def exit_on_error():
    """Map library errors to exit codes: 2 for bad input, 1 for solver failures."""
    try:
        yield
    except ValidationError as e:
        error = e.errors()[0]
        location = ".".join(str(part) for part in error["loc"])
        console.print(f"[red]error:[/red] {location + ': ' if location else ''}{error['msg']}")
        raise typer.Exit(code=InputError.exit_code)
    except (InputError, SolverError) as e:
        console.print(f"[red]error:[/red] {e}")
        raise typer.Exit(code=e.exit_code)


def merge_options(config: Optional[Path], **flags: Any) -> Dict[str, Any]:
    """File values first, then every flag that was given on the command line."""
    options = load_key_value_file(str(config) if config else None)
    unknown = sorted(set(options) - set(flags))
    if unknown:
        raise InputError(f"unknown config keys: {', '.join(unknown)}")
    options.update({key: value for key, value in flags.items() if value is not None})
    return options


def option(options: Dict[str, Any], key: str, cast: Callable, default: Any = None) -> Any:
    if key not in options:
        return default
    try:
        return cast(options[key])
    except (TypeError, ValueError):
        raise InputError(f"invalid value for {key}: {options[key]!r}")


def parse_lambda(value: str) -> Tuple[str, Optional[float]]:
    text = str(value).strip().lower()
    if text in ("exact", "adaptive"):
        return text, None
    try:
        return "fixed", float(text)
    except ValueError:
        raise InputError(f"--lambda must be a number, 'adaptive' or 'exact', got {value!r}")


def parse_list(cast: Callable) -> Callable[[Any], List]:
    """Comma separated values; integer lists also accept ranges like ``2-60``."""

    def parse(text: Any) -> List:
        if isinstance(text, (list, tuple)):
            return [cast(item) for item in text]
        values = []
        for token in str(text).split(","):
            token = token.strip()
            if not token:
                continue
            if cast is int and "-" in token[1:]:
                start, stop = token.split("-", 1)
                values.extend(range(int(start), int(stop) + 1))
            else:
                values.append(cast(token))
        return values

    return parse


def solver_config(options: Dict[str, Any], R: int, default_lambda: str) -> SolverConfig:
    mode, lam = parse_lambda(options.get("lambda", default_lambda))
    fields = {"R": R, "lambda_mode": mode, "lam": lam}
    for key, field, cast in (
        ("alpha", "decay_alpha", float),
        ("tol", "tol", float),
        ("max_outer", "max_outer", int),
        ("seed", "seed", int),
    ):
        if key in options:
            fields[field] = option(options, key, cast)
    return SolverConfig(**fields)


def emit(text: str, out: Optional[Any]) -> None:
    if out:
        logger.info(f"wrote {out}")
    else:
        typer.echo(text, nl=False)


def read_problem(signal: Path, mask: Optional[Path], options: Dict[str, Any]):
    """Signal CSV plus optional mask to (Phi, y, shape).

    The signal holds either all n samples (unobserved ones are ignored) or
    only the m observed ones, in mask order.
    """
    z = GeneratorRepository().read_generator(str(signal))
    n = option(options, "n", int)
    if mask is None:
        if n is not None and n != z.size:
            raise InputError(f"--n {n} does not match the {z.size} samples in {signal}")
        Phi = SamplingOperator.identity(z.size)
        y = z
    else:
        n = n or z.size
        Phi = SpectralRepository().read_mask(str(mask), n)
        if z.size == n:
            y = Phi.apply(z)
        elif z.size == Phi.m:
            y = z
        else:
            raise InputError(f"{signal} has {z.size} samples; expected n={n} or m={Phi.m}")
    return Phi, y, make_shape(Phi.n, option(options, "d1", int))


@app.callback()
def main(
    log_level: Annotated[Optional[str], typer.Option("--log-level", help="DEBUG, INFO, WARNING or ERROR.")] = None,
):
    level = (log_level or settings.LOG_LEVEL).upper()
    if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
        console.print(f"[red]error:[/red] unknown log level {log_level!r}")
        raise typer.Exit(code=InputError.exit_code)
    configure_logging(level)


@app.command()
def complete(
    signal: Annotated[Path, typer.Argument(help="Signal CSV index,re,im.")],
    mask: Annotated[Path, typer.Argument(help="Observed indices, one per line.")],
    n: NOpt = None,
    d1: D1Opt = None,
    rank: RankOpt = None,
    lambda_: LambdaOpt = None,
    alpha: AlphaOpt = None,
    tol: TolOpt = None,
    max_outer: MaxOuterOpt = None,
    seed: SeedOpt = None,
    out: OutOpt = None,
    report: Annotated[Optional[Path], typer.Option("--report", help="Iteration report CSV.")] = None,
    config: ConfigOpt = None,
):
    """Complete a Hankel-structured signal from the samples listed in MASK."""
    with exit_on_error():
        options = merge_options(
            config, n=n, d1=d1, rank=rank, alpha=alpha, tol=tol, max_outer=max_outer,
            seed=seed, out=out, report=report, **{"lambda": lambda_},
        )
        Phi, y, shape = read_problem(signal, mask, options)
        R = option(options, "rank", int)
        if R is None:
            raise InputError("--rank is required")
        result = IrlsDomain(shape, solver_config(options, R, "exact")).solve(Phi, y)
        _write_solution(result, options)


@app.command()
def denoise(
    signal: Annotated[Path, typer.Argument(help="Signal CSV index,re,im.")],
    d1: D1Opt = None,
    rank: RankOpt = None,
    lambda_: LambdaOpt = None,
    alpha: AlphaOpt = None,
    tol: TolOpt = None,
    max_outer: MaxOuterOpt = None,
    seed: SeedOpt = None,
    out: OutOpt = None,
    report: Annotated[Optional[Path], typer.Option("--report", help="Iteration report CSV.")] = None,
    config: ConfigOpt = None,
):
    """Denoise a fully sampled signal towards a rank-R Hankel structure."""
    with exit_on_error():
        options = merge_options(
            config, d1=d1, rank=rank, alpha=alpha, tol=tol, max_outer=max_outer,
            seed=seed, out=out, report=report, **{"lambda": lambda_},
        )
        Phi, y, shape = read_problem(signal, None, options)
        R = option(options, "rank", int)
        if R is None:
            raise InputError("--rank is required")
        result = IrlsDomain(shape, solver_config(options, R, "adaptive")).solve(Phi, y)
        _write_solution(result, options)


def _write_solution(result, options: Dict[str, Any]) -> None:
    out = option(options, "out", str)
    report = option(options, "report", str)
    repository = IrlsRepository()
    text = repository.generator_repository.write_generator(out, result.z_hat)
    if report:
        repository.write_report(report, result)
    if not result.converged:
        logger.warning(f"no convergence within {result.outer_iters} iterations")
    emit(text, out)


@app.command()
def estimate(
    signal: Annotated[Path, typer.Argument(help="Signal CSV index,re,im.")],
    mask: Annotated[Optional[Path], typer.Option("--mask", help="Observed indices; completion before estimation.")] = None,
    method: Annotated[Optional[str], typer.Option("--method", help="struchmirls+esprit, vanilla-esprit or prony.")] = None,
    n: NOpt = None,
    d1: D1Opt = None,
    rank: RankOpt = None,
    lambda_: LambdaOpt = None,
    alpha: AlphaOpt = None,
    tol: TolOpt = None,
    max_outer: MaxOuterOpt = None,
    seed: SeedOpt = None,
    out: OutOpt = None,
    config: ConfigOpt = None,
):
    """Estimate r frequencies, by default with IRLS preprocessing followed by ESPRIT."""
    with exit_on_error():
        options = merge_options(
            config, method=method, n=n, d1=d1, rank=rank, alpha=alpha, tol=tol,
            max_outer=max_outer, seed=seed, out=out, **{"lambda": lambda_},
        )
        method = option(options, "method", str, "struchmirls+esprit")
        if method not in SNR_METHODS:
            raise InputError(f"--method must be one of {', '.join(SNR_METHODS)}")
        r = option(options, "rank", int)
        if r is None:
            raise InputError("--rank is required")
        Phi, y, shape = read_problem(signal, mask, options)

        domain = FrequencyDomain()
        if method == "struchmirls+esprit":
            default_lambda = "exact" if mask is not None else "adaptive"
            result = domain.denoise_then_estimate(y, Phi, shape, solver_config(options, r, default_lambda), r)
        elif mask is not None:
            raise InputError(f"{method} needs fully sampled data")
        elif method == "prony":
            result = domain.prony(y, r)
        else:
            result = domain.esprit(y, shape, r)

        out = option(options, "out", str)
        emit(FrequencyRepository().write_estimates(out, result), out)


@experiment_app.command("phase-transition")
def phase_transition(
    n: NOpt = None,
    d1: D1Opt = None,
    r_values: Annotated[Optional[str], typer.Option("--r-values", help="Model orders, e.g. 1-20 or 2,5,8.")] = None,
    m_values: Annotated[Optional[str], typer.Option("--m-values", help="Sample counts, e.g. 2-60.")] = None,
    full_grid: Annotated[bool, typer.Option("--full-grid", help="r in 1..30 and m in 2..127.")] = False,
    trials: TrialsOpt = None,
    threshold: Annotated[Optional[float], typer.Option("--threshold", help="Relative error counted as success.")] = None,
    alpha: AlphaOpt = None,
    tol: TolOpt = None,
    max_outer: MaxOuterOpt = None,
    seed: SeedOpt = None,
    workers: WorkersOpt = None,
    out: OutOpt = None,
    config: ConfigOpt = None,
):
    """Empirical completion success rate over a grid of (m, r)."""
    with exit_on_error():
        options = merge_options(
            config, n=n, d1=d1, r_values=r_values, m_values=m_values, trials=trials,
            threshold=threshold, alpha=alpha, tol=tol, max_outer=max_outer, seed=seed,
            workers=workers, out=out,
        )
        seed = option(options, "seed", int, settings.SEED)
        experiment = ExperimentConfig(
            kind="phase_transition",
            n=option(options, "n", int, 127),
            d1=option(options, "d1", int),
            r_values=option(options, "r_values", parse_list(int), FULL_R_VALUES if full_grid else DESK_R_VALUES),
            m_values=option(options, "m_values", parse_list(int), FULL_M_VALUES if full_grid else DESK_M_VALUES),
            trials=option(options, "trials", int, 50),
            solver=solver_config(options, 1, "exact"),
            success_threshold=option(options, "threshold", float, settings.SUCCESS_THRESHOLD),
            output_path=option(options, "out", str),
            seed=seed,
            workers=option(options, "workers", int, settings.WORKERS),
        )
        frame = ExperimentDomain(experiment).run_phase_transition()
        emit(ExperimentRepository().write_grid(None, frame, seed), experiment.output_path)


@experiment_app.command("snr-sweep")
def snr_sweep(
    n: NOpt = None,
    d1: D1Opt = None,
    snr: Annotated[Optional[str], typer.Option("--snr", help="SNR values in dB, e.g. inf,20,10,5,0.")] = None,
    method: Annotated[Optional[str], typer.Option("--method", help="Comma separated subset of the methods.")] = None,
    trials: TrialsOpt = None,
    lambda_: LambdaOpt = None,
    alpha: AlphaOpt = None,
    tol: TolOpt = None,
    max_outer: MaxOuterOpt = None,
    seed: SeedOpt = None,
    workers: WorkersOpt = None,
    out: OutOpt = None,
    config: ConfigOpt = None,
):
    """Mean frequency MSE per SNR for IRLS + ESPRIT, vanilla ESPRIT and Prony."""
    with exit_on_error():
        options = merge_options(
            config, n=n, d1=d1, snr=snr, method=method, trials=trials, alpha=alpha, tol=tol,
            max_outer=max_outer, seed=seed, workers=workers, out=out, **{"lambda": lambda_},
        )
        seed = option(options, "seed", int, settings.SEED)
        experiment = ExperimentConfig(
            kind="snr_sweep",
            n=option(options, "n", int, 64),
            d1=option(options, "d1", int),
            snr_values=option(options, "snr", parse_list(float), DEFAULT_SNR_VALUES),
            methods=option(options, "method", parse_list(str), SNR_METHODS),
            trials=option(options, "trials", int, 100),
            solver=solver_config(options, 1, "adaptive"),
            output_path=option(options, "out", str),
            seed=seed,
            workers=option(options, "workers", int, settings.WORKERS),
        )
        frame = ExperimentDomain(experiment).run_snr_sweep()
        emit(ExperimentRepository().write_grid(None, frame, seed), experiment.output_path)


@app.command()
def serve(
    host: Annotated[str, typer.Option("--host")] = "0.0.0.0",
    port: Annotated[int, typer.Option("--port")] = 8000,
):
    """Run the HTTP API with uvicorn."""
    import uvicorn

    uvicorn.run("main:app", host=host, port=port, log_level=logging.getLevelName(logging.getLogger().level).lower())


@app.command()
def version():
    """Print the library version."""
    typer.echo(VERSION)


if __name__ == "__main__":
    app()
