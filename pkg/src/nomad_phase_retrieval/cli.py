"""
Command line front end: phantom -> measure -> zeta / hio / cgpr -> compare.

Every solver default is the value of the reference experiments; ``--help``
shows it next to each flag.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable, Optional

import click
import numpy as np
import pandas as pd
import scipy.fft
import structlog
from pydantic import ValidationError

from nomad_phase_retrieval import io as pr_io
from nomad_phase_retrieval.complexity import (
    MagnitudeData,
    complexity_fourier,
    complexity_image,
)
from nomad_phase_retrieval.config import (
    REFERENCE_BETA,
    REFERENCE_PHASE_STEP,
    REFERENCE_T,
    REFERENCE_ZETA_REL_TOL,
    HioVariant,
    InitRegion,
    NoiseSpec,
    PhantomSpec,
    Registration,
    RunConfig,
    parse_pattern,
)
from nomad_phase_retrieval.errors import FieldFileError, PhaseRetrievalError
from nomad_phase_retrieval.field import ComplexField, SupportMask, dft2
from nomad_phase_retrieval.log import LEVELS, configure_logging
from nomad_phase_retrieval.measurement import apply_poisson, forward_magnitude
from nomad_phase_retrieval.phantom import make_phantom
from nomad_phase_retrieval.solver import (
    IterationTrace,
    constant_init,
    error_db,
    initial_guess,
    run_cgpr,
    run_fixed_tv_hio,
    run_hio,
    stagnation_ratio,
)

logger = structlog.get_logger(__name__)

USAGE_EXIT_CODE = 2
TRACE_SUFFIX = '.pr_trace.csv'
# per-command values used when neither a flag nor --config sets them
HIO_DEFAULTS = {'max_outer_iters': 500, 'fixed_tv_subiters': 0}
CGPR_DEFAULTS = {'max_outer_iters': 200}


class CommandFailure(click.ClickException):
    """One-line diagnostic with the exit code of the underlying error."""

    def __init__(self, message: str, exit_code: int) -> None:
        super().__init__(message)
        self.exit_code = exit_code


def _validation_message(exc: ValidationError) -> str:
    return '; '.join(
        f'{".".join(str(p) for p in err["loc"]) or "value"}: {err["msg"]}'
        for err in exc.errors()
    )


class PhaseRetrievalGroup(click.Group):
    def invoke(self, ctx: click.Context) -> Any:
        try:
            return super().invoke(ctx)
        except PhaseRetrievalError as exc:
            raise CommandFailure(
                f'{type(exc).__name__}: {exc}', exc.exit_code
            ) from exc
        except ValidationError as exc:
            raise CommandFailure(
                f'invalid parameters: {_validation_message(exc)}', USAGE_EXIT_CODE
            ) from exc
        except ValueError as exc:
            raise CommandFailure(str(exc), USAGE_EXIT_CODE) from exc


def _grid(text: str) -> tuple[int, int]:
    """``N`` or ``RxC``."""
    parts = text.lower().split('x')
    try:
        values = [int(p) for p in parts]
    except ValueError as exc:
        raise click.BadParameter(f'expected N or RxC, got {text!r}') from exc
    if len(values) == 1:
        values *= 2
    if len(values) != 2:  # noqa: PLR2004
        raise click.BadParameter(f'expected N or RxC, got {text!r}')
    return values[0], values[1]


def _load(path: Path, expected: type, what: str):
    payload = pr_io.read_field(path)
    if not isinstance(payload, expected):
        raise FieldFileError(
            f'{path} holds a {type(payload).__name__}, expected {what}'
        )
    return payload


def _fmt(value: Optional[float]) -> str:
    return '' if value is None else f'{value:.17g}'


@click.group(cls=PhaseRetrievalGroup)
@click.option(
    '--log-level',
    type=click.Choice(LEVELS),
    default='warning',
    show_default=True,
    help='Structured log events at or above this level go to stderr.',
)
@click.option(
    '--workers',
    type=click.IntRange(min=1),
    default=1,
    show_default=True,
    help='Threads used inside each FFT (results do not depend on it).',
)
@click.pass_context
def cli(ctx: click.Context, log_level: str, workers: int) -> None:
    """Complexity-guided phase retrieval (CGPR) and Fienup HIO."""
    configure_logging(log_level)
    ctx.ensure_object(dict)
    ctx.obj['workers'] = workers
    ctx.with_resource(scipy.fft.set_workers(workers))


@cli.command()
@click.option('--window', default='128', show_default=True, help='N or RxC pixels.')
@click.option(
    '--support', default='60', show_default=True, help='Support extent, N or HxW.'
)
@click.option(
    '--phase-step',
    type=float,
    default=REFERENCE_PHASE_STEP,
    show_default=True,
    help='Phase step in radians (reference: 2*pi/3).',
)
@click.option(
    '--pattern',
    default='glyph:PHASE',
    show_default=True,
    help='glyph:TEXT, checker:BLOCK or disk:RADIUS_FRAC.',
)
@click.option('--seed', type=click.IntRange(min=0), default=0, show_default=True)
@click.option('--out', type=click.Path(path_type=Path), required=True)
@click.option('--mask-out', type=click.Path(path_type=Path), required=True)
def phantom(
    window: str,
    support: str,
    phase_step: float,
    pattern: str,
    seed: int,
    out: Path,
    mask_out: Path,
) -> None:
    """Binary phase object on a centered support plus its mask."""
    spec = PhantomSpec(
        window=_grid(window),
        support_extent=_grid(support),
        phase_step=phase_step,
        pattern=parse_pattern(pattern),
        seed=seed,
    )
    obj, mask = make_phantom(spec)
    pr_io.write_field(out, obj)
    pr_io.write_field(mask_out, mask)
    click.echo(f'zeta {complexity_image(obj):.17g}')


@cli.command()
@click.argument('field_path', type=click.Path(exists=True, path_type=Path))
@click.option('--out', type=click.Path(path_type=Path), required=True)
@click.option(
    '--photons',
    type=float,
    default=None,
    help='Mean photons per detector pixel (reference: 1e4, 1e6); omit for noiseless.',
)
@click.option('--seed', type=click.IntRange(min=0), default=0, show_default=True)
def measure(field_path: Path, out: Path, photons: Optional[float], seed: int) -> None:
    """Fourier magnitude of an object, optionally with Poisson noise."""
    obj = _load(field_path, ComplexField, 'a complex field')
    magnitude = forward_magnitude(obj)
    if photons is not None:
        magnitude = apply_poisson(
            magnitude, NoiseSpec(photons_per_pixel=photons, seed=seed)
        )
    pr_io.write_field(out, magnitude)


@cli.command()
@click.argument('magnitude_path', type=click.Path(exists=True, path_type=Path))
def zeta(magnitude_path: Path) -> None:
    """Complexity estimated from Fourier magnitude data alone."""
    magnitude = _load(magnitude_path, MagnitudeData, 'a magnitude')
    click.echo(f'{complexity_fourier(magnitude):.17g}')


def solver_options() -> Callable:
    options = [
        click.option(
            '--magnitude',
            'magnitude_path',
            type=click.Path(exists=True, path_type=Path),
            required=True,
        ),
        click.option(
            '--mask', 'mask_path', type=click.Path(exists=True, path_type=Path),
            required=True,
        ),
        click.option(
            '--truth',
            'truth_path',
            type=click.Path(exists=True, path_type=Path),
            default=None,
            help='Ground-truth object; enables the error column.',
        ),
        click.option(
            '--config',
            'config_path',
            type=click.Path(exists=True, path_type=Path),
            default=None,
            help='YAML file of run parameters; flags override it.',
        ),
        click.option(
            '--beta', type=float, default=None,
            help=f'HIO feedback in (0.5, 1) [default: {REFERENCE_BETA}, reference value].',
        ),
        click.option(
            '--t', 't', type=float, default=None,
            help=f'TV step scale [default: {REFERENCE_T}, reference value].',
        ),
        click.option(
            '--tol', type=float, default=None,
            help=f'Relative complexity band [default: {REFERENCE_ZETA_REL_TOL}, '
            'reference value 0.5%].',
        ),
        click.option(
            '--max-subiters', type=click.IntRange(min=1), default=None,
            help='Cap on TV sub-iterations per outer iteration [default: 200].',
        ),
        click.option(
            '--seed', type=click.IntRange(min=0), default=None,
            help='Seed of the random initial phase [default: 0].',
        ),
        click.option(
            '--variant', type=click.Choice([v.value for v in HioVariant]),
            default=None, help='Off-support HIO update [default: fienup_classic].',
        ),
        click.option(
            '--registration', type=click.Choice([r.value for r in Registration]),
            default=None,
            help='Error-metric correlation mode [default: circular_shift].',
        ),
        click.option(
            '--init-region', type=click.Choice([r.value for r in InitRegion]),
            default=None, help='Where the initial guess lives [default: support].',
        ),
    ]

    def decorate(func: Callable) -> Callable:
        for option in reversed(options):
            func = option(func)
        return func

    return decorate


def _run_config(
    config_path: Optional[Path],
    defaults: Optional[dict[str, Any]] = None,
    **flags: Any,
) -> RunConfig:
    """Flags beat the ``--config`` file, which beats per-command ``defaults``."""
    overrides = {
        'beta': flags.get('beta'),
        't': flags.get('t'),
        'zeta_rel_tol': flags.get('tol'),
        'max_outer_iters': flags.get('iters'),
        'max_tv_subiters': flags.get('max_subiters'),
        'seed': flags.get('seed'),
        'hio_variant': flags.get('variant'),
        'registration': flags.get('registration'),
        'init_region': flags.get('init_region'),
        'fixed_tv_subiters': flags.get('tv_substeps'),
    }
    if config_path is not None:
        return RunConfig.from_yaml(config_path, defaults=defaults, **overrides)
    merged = dict(defaults or {})
    merged.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(**merged)


def _initial_field(
    init: str, shape: tuple[int, int], cfg: RunConfig, mask: SupportMask
) -> ComplexField:
    if init == 'random':
        return initial_guess(shape, cfg, mask)
    if init == 'constant':
        region = mask if cfg.init_region is InitRegion.SUPPORT else None
        return constant_init(shape, region)
    if init.startswith('file:'):
        return _load(Path(init[len('file:') :]), ComplexField, 'a complex field')
    raise click.BadParameter(
        f'expected random, constant or file:PATH, got {init!r}', param_hint='--init'
    )


def _solve(
    select_runner: Callable[[RunConfig], Callable],
    defaults: dict[str, Any],
    **kwargs: Any,
) -> None:
    magnitude = _load(kwargs['magnitude_path'], MagnitudeData, 'a magnitude')
    mask = _load(kwargs['mask_path'], SupportMask, 'a support mask')
    truth = None
    if kwargs['truth_path'] is not None:
        truth = _load(kwargs['truth_path'], ComplexField, 'a complex field')
    cfg = _run_config(
        defaults=defaults, **{k: v for k, v in kwargs.items() if k != 'init'}
    )
    init = _initial_field(kwargs['init'], magnitude.shape, cfg, mask)

    result, trace = select_runner(cfg)(magnitude, mask, cfg, init, truth)
    pr_io.write_field(kwargs['out'], result)
    if kwargs['trace_path'] is not None:
        pr_io.write_trace_csv(trace, kwargs['trace_path'])
    _echo_summary(trace)


def _echo_summary(trace: IterationTrace) -> None:
    final = trace.final
    click.echo(f'engine {trace.engine}')
    click.echo(f'iterations {len(trace)}')
    click.echo(f'zeta_target {_fmt(trace.zeta_target)}')
    click.echo(f'final_zeta {_fmt(final.zeta)}')
    if trace.zeta_target:
        click.echo(f'stagnation_ratio {stagnation_ratio(trace):.6f}')
    if final.error_sq is not None:
        click.echo(f'final_error_sq {_fmt(final.error_sq)}')
    if trace.cap_hits:
        click.echo(f'tv_cap_hits {len(trace.cap_hits)}')


def _output_options(func: Callable) -> Callable:
    func = click.option(
        '--trace', 'trace_path', type=click.Path(path_type=Path), default=None,
        help='Per-iteration CSV (iter, zeta, error_sq, tv, tv_substeps, elapsed_ms).',
    )(func)
    func = click.option(
        '--out', type=click.Path(path_type=Path), required=True,
        help='Reconstructed field.',
    )(func)
    return click.option(
        '--init', default='random', show_default=True,
        help='random, constant or file:PATH.',
    )(func)


@cli.command()
@solver_options()
@click.option(
    '--iters', type=click.IntRange(min=1), default=None,
    help='Outer iterations [default: 500, reference value].',
)
@click.option(
    '--tv-substeps', type=click.IntRange(min=0), default=None,
    help='Fixed unguided TV steps per iteration; 0 runs plain HIO [default: 0].',
)
@_output_options
def hio(**kwargs: Any) -> None:
    """Fienup hybrid input-output."""
    _solve(
        lambda cfg: run_fixed_tv_hio if cfg.fixed_tv_subiters else run_hio,
        HIO_DEFAULTS,
        **kwargs,
    )


@cli.command()
@solver_options()
@click.option(
    '--iters', type=click.IntRange(min=1), default=None,
    help='Outer iterations [default: 200, reference value].',
)
@_output_options
def cgpr(**kwargs: Any) -> None:
    """Complexity-guided phase retrieval."""
    _solve(lambda _: run_cgpr, CGPR_DEFAULTS, **kwargs)


def _trial(
    seed: int,
    magnitude: MagnitudeData,
    mask: SupportMask,
    truth: Optional[ComplexField],
    cfg: RunConfig,
    iters: dict[str, int],
    workers: int,
) -> dict[str, tuple[IterationTrace, float]]:
    trial_cfg = cfg.model_copy(update={'seed': seed})
    init = initial_guess(magnitude.shape, trial_cfg, mask)
    runners = {'hio': run_hio, 'cgpr': run_cgpr}
    outcome = {}
    with scipy.fft.set_workers(workers):
        for engine, runner in runners.items():
            engine_cfg = trial_cfg.model_copy(
                update={'max_outer_iters': iters[engine]}
            )
            start = time.perf_counter()
            _, trace = runner(magnitude, mask, engine_cfg, init, truth)
            outcome[engine] = (trace, time.perf_counter() - start)
    logger.info('trial_finished', seed=seed)
    return outcome


def summarize_trials(rows: list[dict[str, Any]]) -> pd.DataFrame:
    """Trial rows followed by median/min/max rows per engine."""
    trials = pd.DataFrame(rows)
    trials.insert(1, 'statistic', 'trial')
    metrics = ['final_zeta', 'final_error_sq', 'final_error_db']
    trials[metrics] = trials[metrics].astype(float)
    stats = []
    for engine, group in trials.groupby('engine', sort=False):
        for statistic in ('median', 'min', 'max'):
            row = {'engine': engine, 'statistic': statistic, 'seed': None}
            row['iterations'] = int(group['iterations'].iloc[0])
            row.update(group[metrics].agg(statistic).to_dict())
            stats.append(row)
    return pd.concat([trials, pd.DataFrame(stats)], ignore_index=True)


@cli.command()
@solver_options()
@click.option('--trials', type=click.IntRange(min=1), default=5, show_default=True)
@click.option(
    '--hio-iters', type=click.IntRange(min=1), default=500, show_default=True,
    help='HIO iterations per trial (reference: 500).',
)
@click.option(
    '--cgpr-iters', type=click.IntRange(min=1), default=200, show_default=True,
    help='CGPR iterations per trial (reference: 200).',
)
@click.option(
    '--jobs', type=click.IntRange(min=1), default=1, show_default=True,
    help='Trials run concurrently.',
)
@click.option('--out-dir', type=click.Path(path_type=Path), required=True)
@click.pass_context
def compare(ctx: click.Context, **kwargs: Any) -> None:
    """Paired HIO and CGPR runs from identical random starts, one per seed."""
    magnitude = _load(kwargs['magnitude_path'], MagnitudeData, 'a magnitude')
    mask = _load(kwargs['mask_path'], SupportMask, 'a support mask')
    truth = None
    if kwargs['truth_path'] is not None:
        truth = _load(kwargs['truth_path'], ComplexField, 'a complex field')
    cfg = _run_config(**kwargs)
    out_dir: Path = kwargs['out_dir']
    out_dir.mkdir(parents=True, exist_ok=True)

    seeds = [cfg.seed + i for i in range(kwargs['trials'])]
    iters = {'hio': kwargs['hio_iters'], 'cgpr': kwargs['cgpr_iters']}
    workers = ctx.obj.get('workers', 1) if ctx.obj else 1
    with ThreadPoolExecutor(max_workers=kwargs['jobs']) as pool:
        outcomes = list(
            pool.map(
                lambda s: _trial(s, magnitude, mask, truth, cfg, iters, workers),
                seeds,
            )
        )

    rows, timings = [], []
    for seed, outcome in zip(seeds, outcomes):
        for engine, (trace, wall) in outcome.items():
            pr_io.write_trace_csv(trace, out_dir / f'{engine}_seed{seed}{TRACE_SUFFIX}')
            final = trace.final
            rows.append(
                {
                    'engine': engine,
                    'seed': seed,
                    'iterations': len(trace),
                    'final_zeta': final.zeta,
                    'final_error_sq': final.error_sq,
                    'final_error_db': (
                        None if final.error_sq is None else error_db(final.error_sq)
                    ),
                }
            )
            timings.append(
                {
                    'engine': engine,
                    'seed': seed,
                    'wall_s': wall,
                    'ms_per_iteration': 1e3 * wall / len(trace),
                }
            )

    summary = summarize_trials(rows)
    summary.to_csv(
        out_dir / 'summary.csv',
        index=False,
        float_format='%.17g',
        na_rep='',
        lineterminator='\n',
    )
    pd.DataFrame(timings).to_csv(
        out_dir / 'timings.csv', index=False, float_format='%.6f', lineterminator='\n'
    )
    medians = summary[summary['statistic'] == 'median']
    for row in medians.itertuples(index=False):
        error = row.final_error_sq
        shown = 'n/a' if error is None or math.isnan(error) else f'{error:.6g}'
        click.echo(f'{row.engine} median_final_error_sq {shown}')


@cli.command()
@click.argument('field_path', type=click.Path(exists=True, path_type=Path))
@click.option(
    '--channel',
    type=click.Choice(['amplitude', 'phase', 'log_amplitude']),
    default='phase',
    show_default=True,
)
@click.option(
    '--spectrum', is_flag=True, help='Export the centered DFT instead of the field.'
)
@click.option('--out', type=click.Path(path_type=Path), required=True)
def export(field_path: Path, channel: str, spectrum: bool, out: Path) -> None:
    """8-bit portable graymap (P5) of a field, its spectrum or a magnitude file."""
    payload = pr_io.read_field(field_path)
    centered = spectrum
    if isinstance(payload, MagnitudeData):
        view = ComplexField(payload.values, payload.dx, payload.dy)
        centered = True
    elif isinstance(payload, SupportMask):
        view = ComplexField(payload.inside.astype(np.float64))
    else:
        view = dft2(payload) if spectrum else payload
    pr_io.export_grayscale(view, channel, out, centered=centered)


if __name__ == '__main__':
    cli()
