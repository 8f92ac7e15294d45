"""
Iterative engines: Fourier-magnitude projection, the HIO object-domain update,
the complexity-guided TV sub-loop, complete HIO / CGPR runs and the twin-aware
object-domain error metric.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import pandas as pd
import structlog
from scipy import fft as sp_fft

from nomad_phase_retrieval.complexity import (
    MagnitudeData,
    complexity_fourier,
    complexity_image,
    complexity_tolerance_band,
)
from nomad_phase_retrieval.config import (
    HioVariant,
    InitRegion,
    Registration,
    RunConfig,
    TvParams,
)
from nomad_phase_retrieval.errors import (
    ZeroGradientError,
    ZeroTruthError,
    check_same_shape,
)
from nomad_phase_retrieval.field import (
    ComplexField,
    SupportMask,
    dft2,
    idft2,
    inner,
    power,
)
from nomad_phase_retrieval.phantom import twin
from nomad_phase_retrieval.sparsity import tv, tv_descent_update

logger = structlog.get_logger(__name__)

TRACE_COLUMNS = ['iter', 'zeta', 'error_sq', 'tv', 'tv_substeps', 'elapsed_ms']
STAGNATION_WINDOW = 100


@dataclass
class IterationRecord:
    iter: int
    zeta: float
    error_sq: Optional[float]
    tv: float
    tv_substeps: int
    elapsed_ms: float
    tv_cap_hit: bool = False


@dataclass
class IterationTrace:
    """Per-iteration history of one run, contiguous from iteration 1."""

    engine: str
    zeta_target: Optional[float] = None
    records: list[IterationRecord] = field(default_factory=list)

    def append(self, record: IterationRecord) -> None:
        expected = len(self.records) + 1
        if record.iter != expected:
            raise ValueError(f'trace expects iteration {expected}, got {record.iter}')
        self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def has_error(self) -> bool:
        return any(r.error_sq is not None for r in self.records)

    @property
    def final(self) -> IterationRecord:
        return self.records[-1]

    @property
    def cap_hits(self) -> list[int]:
        return [r.iter for r in self.records if r.tv_cap_hit]

    def zetas(self) -> np.ndarray:
        return np.array([r.zeta for r in self.records])

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(
            {
                'iter': [r.iter for r in self.records],
                'zeta': [r.zeta for r in self.records],
                'error_sq': [
                    np.nan if r.error_sq is None else r.error_sq for r in self.records
                ],
                'tv': [r.tv for r in self.records],
                'tv_substeps': [r.tv_substeps for r in self.records],
                'elapsed_ms': [r.elapsed_ms for r in self.records],
            },
            columns=TRACE_COLUMNS,
        )
        return frame.astype({'iter': 'int64', 'tv_substeps': 'int64'})


def random_phase_init(
    shape: tuple[int, int],
    seed: int,
    support: Optional[SupportMask] = None,
    dx: float = 1.0,
    dy: float = 1.0,
) -> ComplexField:
    """``exp(i*theta)`` with theta uniform on [0, 2*pi); zero off ``support``."""
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0.0, 2.0 * np.pi, size=shape)
    samples = np.exp(1j * theta)
    if support is not None:
        check_same_shape(tuple(shape), support.shape)
        samples = np.where(support.inside, samples, 0.0)
    return ComplexField(samples, dx, dy)


def constant_init(
    shape: tuple[int, int],
    support: Optional[SupportMask] = None,
    dx: float = 1.0,
    dy: float = 1.0,
) -> ComplexField:
    """Unit field over the window, or over ``support`` with zeros elsewhere."""
    samples = np.ones(shape, dtype=np.complex128)
    if support is not None:
        check_same_shape(tuple(shape), support.shape)
        samples = np.where(support.inside, samples, 0.0)
    return ComplexField(samples, dx, dy)


def initial_guess(
    shape: tuple[int, int], cfg: RunConfig, support: SupportMask
) -> ComplexField:
    region = support if cfg.init_region is InitRegion.SUPPORT else None
    return random_phase_init(shape, cfg.seed, region)


def fourier_project(g: ComplexField, m: MagnitudeData) -> ComplexField:
    """Keep the spectral phase of ``g``, impose the measured magnitude."""
    check_same_shape(g.shape, m.shape)
    spectrum = dft2(g).samples
    modulus = np.abs(spectrum)
    # arg(0) is taken as 0
    phasor = np.ones_like(spectrum)
    np.divide(spectrum, modulus, out=phasor, where=modulus > 0)
    return idft2(g.with_samples(m.values * phasor))


def hio_update(
    g_prev: ComplexField,
    g_proj: ComplexField,
    c: SupportMask,
    beta: float,
    variant: HioVariant = HioVariant.FIENUP_CLASSIC,
) -> ComplexField:
    check_same_shape(g_prev.shape, g_proj.shape, c.shape)
    if not 0.5 < beta < 1.0:  # noqa: PLR2004
        raise ValueError(f'beta must lie in (0.5, 1), got {beta}')
    variant = HioVariant(variant)
    if variant is HioVariant.PAPER_EXACT:
        outside = g_proj.samples - beta * g_prev.samples
    else:
        outside = g_prev.samples - beta * g_proj.samples
    return g_proj.with_samples(np.where(c.inside, g_proj.samples, outside))


def object_estimate(g: ComplexField, c: SupportMask) -> ComplexField:
    """
    The reconstruction carried by an iterate: its samples on ``c``, zero
    elsewhere. Off-support samples of a HIO iterate are feedback, not object.
    """
    check_same_shape(g.shape, c.shape)
    return g.with_samples(np.where(c.inside, g.samples, 0.0))


def _masked_tv_descent(
    g: ComplexField,
    c: SupportMask,
    p: TvParams,
    max_steps: int,
    zeta_ceiling: Optional[float] = None,
) -> tuple[ComplexField, int, float]:
    """
    TV descent steps restricted to pixels in ``c``; the unit direction comes from
    the whole field. Stops once zeta is at or below ``zeta_ceiling`` (when given),
    on a vanishing TV gradient, or after ``max_steps``.
    """
    current = g
    zeta = complexity_image(current)
    for step in range(max_steps):
        if zeta_ceiling is not None and zeta <= zeta_ceiling:
            return current, step, zeta
        try:
            update = tv_descent_update(current, p)
        except ZeroGradientError:
            logger.debug('tv_descent_skipped', reason='zero_gradient', substep=step)
            return current, step, zeta
        current = current.with_samples(
            current.samples - np.where(c.inside, update, 0.0)
        )
        zeta = complexity_image(current)
    return current, max_steps, zeta


def complexity_guided_tv(
    g: ComplexField, c: SupportMask, zeta_target: float, cfg: RunConfig
) -> tuple[ComplexField, int]:
    """
    Masked TV descent until the image-domain zeta falls to or below the upper
    edge of the tolerance band around ``zeta_target`` (overshooting below the
    band also stops, without backtracking), capped at ``cfg.max_tv_subiters``.
    """
    check_same_shape(g.shape, c.shape)
    _, high = complexity_tolerance_band(zeta_target, cfg.zeta_rel_tol)
    result, substeps, _ = _masked_tv_descent(
        g, c, cfg.tv_params, cfg.max_tv_subiters, zeta_ceiling=high
    )
    return result, substeps


def error_metric(
    g_n: ComplexField,
    truth: ComplexField,
    registration: Registration = Registration.NONE,
) -> float:
    """
    Normalized object-domain error, minimized over ``g_n`` and its twin and
    blind to a global phase factor.
    """
    check_same_shape(g_n.shape, truth.shape)
    truth_power = power(truth)
    if truth_power <= 0:
        raise ZeroTruthError('ground truth is identically zero')
    registration = Registration(registration)

    def single(candidate: ComplexField) -> float:
        corr = _correlation(candidate, truth, registration)
        numerator = power(candidate) + truth_power - 2.0 * corr
        return max(0.0, numerator / truth_power)

    return min(single(g_n), single(twin(g_n)))


def _correlation(
    candidate: ComplexField, truth: ComplexField, registration: Registration
) -> float:
    if registration is Registration.NONE:
        return abs(inner(candidate, truth))
    # circular cross-correlation over every shift in one pass
    cross = sp_fft.ifft2(
        sp_fft.fft2(candidate.samples) * np.conj(sp_fft.fft2(truth.samples))
    )
    return float(np.max(np.abs(cross)))


def error_db(error_sq: float) -> float:
    """``10*log10(E^2)``, the scale error curves are usually plotted on."""
    return -math.inf if error_sq <= 0 else 10.0 * math.log10(error_sq)


def stagnation_ratio(
    trace: IterationTrace,
    zeta_target: Optional[float] = None,
    window: int = STAGNATION_WINDOW,
) -> float:
    """Mean zeta over the last ``window`` iterations relative to the target."""
    target = trace.zeta_target if zeta_target is None else zeta_target
    if not target or not len(trace):
        raise ValueError('stagnation ratio needs a non-empty trace and a target')
    return float(trace.zetas()[-window:].mean() / target)


def _iterate(
    engine: str,
    m: MagnitudeData,
    c: SupportMask,
    cfg: RunConfig,
    init: ComplexField,
    truth: Optional[ComplexField],
) -> tuple[ComplexField, IterationTrace]:
    shapes = [m.shape, c.shape, init.shape]
    if truth is not None:
        shapes.append(truth.shape)
    check_same_shape(*shapes)

    zeta_target = complexity_fourier(m)
    # a flat spectrum (zero target) leaves only constant fields inside the band
    high = 0.0
    if zeta_target > 0:
        _, high = complexity_tolerance_band(zeta_target, cfg.zeta_rel_tol)

    trace = IterationTrace(engine=engine, zeta_target=zeta_target)
    logger.info(
        'run_started',
        engine=engine,
        shape=m.shape,
        iterations=cfg.max_outer_iters,
        zeta_target=zeta_target,
        beta=cfg.beta,
        variant=cfg.hio_variant.value,
    )

    g = init
    for n in range(1, cfg.max_outer_iters + 1):
        start = time.perf_counter()
        g_proj = fourier_project(g, m)
        g_next = hio_update(g, g_proj, c, cfg.beta, cfg.hio_variant)

        substeps, cap_hit = 0, False
        if engine == 'cgpr':
            g_next, substeps, zeta = _masked_tv_descent(
                g_next, c, cfg.tv_params, cfg.max_tv_subiters, zeta_ceiling=high
            )
            cap_hit = substeps == cfg.max_tv_subiters and zeta > high
        elif engine == 'fixed_tv' and cfg.fixed_tv_subiters:
            g_next, substeps, zeta = _masked_tv_descent(
                g_next, c, cfg.tv_params, cfg.fixed_tv_subiters
            )
        else:
            zeta = complexity_image(g_next)
        elapsed_ms = (time.perf_counter() - start) * 1e3

        record = IterationRecord(
            iter=n,
            zeta=zeta,
            error_sq=(
                error_metric(object_estimate(g_next, c), truth, cfg.registration)
                if truth is not None
                else None
            ),
            tv=tv(g_next),
            tv_substeps=substeps,
            elapsed_ms=elapsed_ms,
            tv_cap_hit=cap_hit,
        )
        trace.append(record)
        if cap_hit:
            logger.warning(
                'tv_subloop_capped', iteration=n, zeta=zeta, zeta_target=zeta_target
            )
        if n % cfg.log_every == 0:
            logger.debug(
                'iteration_completed',
                engine=engine,
                iteration=n,
                zeta=zeta,
                error_sq=record.error_sq,
                tv_substeps=substeps,
            )
        g = g_next

    logger.info(
        'run_finished',
        engine=engine,
        iterations=len(trace),
        final_zeta=trace.final.zeta,
        final_error_sq=trace.final.error_sq,
        zeta_ratio=trace.final.zeta / zeta_target if zeta_target > 0 else None,
        tv_cap_hits=len(trace.cap_hits),
    )
    return g, trace


def run_hio(
    m: MagnitudeData,
    c: SupportMask,
    cfg: RunConfig,
    init: ComplexField,
    truth: Optional[ComplexField] = None,
) -> tuple[ComplexField, IterationTrace]:
    return _iterate('hio', m, c, cfg, init, truth)


def run_cgpr(
    m: MagnitudeData,
    c: SupportMask,
    cfg: RunConfig,
    init: ComplexField,
    truth: Optional[ComplexField] = None,
) -> tuple[ComplexField, IterationTrace]:
    """
    HIO with complexity guidance: after every HIO update the support pixels get
    TV descent steps until the iterate's zeta reaches the target estimated once
    from ``m``.
    """
    return _iterate('cgpr', m, c, cfg, init, truth)


def run_fixed_tv_hio(
    m: MagnitudeData,
    c: SupportMask,
    cfg: RunConfig,
    init: ComplexField,
    truth: Optional[ComplexField] = None,
) -> tuple[ComplexField, IterationTrace]:
    """Sparsity-assisted HIO with ``cfg.fixed_tv_subiters`` unguided TV steps."""
    if not cfg.fixed_tv_subiters:
        raise ValueError('fixed_tv_subiters must be positive for this engine')
    return _iterate('fixed_tv', m, c, cfg, init, truth)
