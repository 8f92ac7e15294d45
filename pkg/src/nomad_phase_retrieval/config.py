"""
Validated parameter sets for the solvers, the phantom generator and the noise
model. Defaults are the values used in the reference experiments (beta 0.9,
t 0.005, 0.5 % complexity tolerance).
"""

from __future__ import annotations

import math
from enum import Enum
from pathlib import Path
from typing import Annotated, Any, Literal, Optional, Union

import yaml
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    NonNegativeInt,
    PositiveFloat,
    PositiveInt,
    field_validator,
    model_validator,
)

REFERENCE_BETA = 0.9
REFERENCE_T = 0.005
REFERENCE_ZETA_REL_TOL = 0.005
REFERENCE_PHASE_STEP = 2.0 * math.pi / 3.0


class HioVariant(str, Enum):
    # off-support update g' - beta*g as printed in the reference derivation
    PAPER_EXACT = 'paper_exact'
    # Fienup's g - beta*g'
    FIENUP_CLASSIC = 'fienup_classic'


class Registration(str, Enum):
    NONE = 'none'
    CIRCULAR_SHIFT = 'circular_shift'


class InitRegion(str, Enum):
    WINDOW = 'window'
    SUPPORT = 'support'


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')


class TvParams(_Frozen):
    """
    ``epsilon`` is the smoothing floor under the TV square root; ``None`` picks
    ``1e-8 * max(1, max|grad f|)`` per call.
    """

    epsilon: Optional[PositiveFloat] = None
    step_scale_t: float = Field(REFERENCE_T, gt=0.0, lt=1.0)


class RunConfig(_Frozen):
    """
    Solver parameters. The random start covers only the support: off-support
    samples of a HIO iterate are carried forward as feedback, so noise placed
    there keeps the window complexity above the measured value.

    The error metric registers over circular shifts by default. On an even
    window the conjugate reflection through the origin sits one pixel away from
    the twin that fits a centred support.
    """

    beta: float = Field(REFERENCE_BETA, gt=0.5, lt=1.0)
    t: float = Field(REFERENCE_T, gt=0.0, lt=1.0)
    zeta_rel_tol: float = Field(REFERENCE_ZETA_REL_TOL, gt=0.0, lt=1.0)
    max_outer_iters: PositiveInt = 200
    max_tv_subiters: PositiveInt = 200
    seed: NonNegativeInt = 0
    hio_variant: HioVariant = HioVariant.FIENUP_CLASSIC
    registration: Registration = Registration.CIRCULAR_SHIFT
    init_region: InitRegion = InitRegion.SUPPORT
    fixed_tv_subiters: NonNegativeInt = 0
    tv_epsilon: Optional[PositiveFloat] = None
    log_every: PositiveInt = 1

    @property
    def tv_params(self) -> TvParams:
        return TvParams(epsilon=self.tv_epsilon, step_scale_t=self.t)

    @classmethod
    def from_yaml(
        cls,
        path: Union[str, Path],
        defaults: Optional[dict[str, Any]] = None,
        **overrides,
    ) -> RunConfig:
        """
        Load keys from a YAML mapping. ``defaults`` fill keys the file leaves
        out; ``overrides`` that are not None win over both.
        """
        with Path(path).open('r', encoding='utf-8') as fh:
            loaded = yaml.safe_load(fh) or {}
        if not isinstance(loaded, dict):
            raise ValueError(f'{path}: expected a mapping of RunConfig keys')
        merged = dict(defaults or {})
        merged.update(loaded)
        merged.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**merged)


class GlyphPattern(_Frozen):
    kind: Literal['glyph'] = 'glyph'
    text: str = Field('PHASE', min_length=1)


class CheckerPattern(_Frozen):
    kind: Literal['checker'] = 'checker'
    block: PositiveInt = 8


class DiskPattern(_Frozen):
    kind: Literal['disk'] = 'disk'
    radius_frac: float = Field(0.5, gt=0.0, le=1.0)


Pattern = Annotated[
    Union[GlyphPattern, CheckerPattern, DiskPattern], Field(discriminator='kind')
]


def parse_pattern(text: str) -> Union[GlyphPattern, CheckerPattern, DiskPattern]:
    """``glyph:TEXT``, ``checker:BLOCK`` or ``disk:RADIUS_FRAC``."""
    kind, _, arg = text.partition(':')
    kind = kind.strip().lower()
    if kind == 'glyph':
        return GlyphPattern(text=arg or 'PHASE')
    if kind == 'checker':
        return CheckerPattern(block=int(arg)) if arg else CheckerPattern()
    if kind == 'disk':
        return DiskPattern(radius_frac=float(arg)) if arg else DiskPattern()
    raise ValueError(f'unknown pattern {text!r}; use glyph:, checker: or disk:')


class PhantomSpec(_Frozen):
    """
    Binary phase object on a centered support. The Nyquist margin
    (extent <= window/2) is checked by the generator, which raises
    :class:`~nomad_phase_retrieval.errors.NyquistViolationError`.
    """

    window: tuple[PositiveInt, PositiveInt] = (128, 128)
    support_extent: tuple[PositiveInt, PositiveInt] = (60, 60)
    phase_step: float = Field(REFERENCE_PHASE_STEP, gt=0.0, lt=2.0 * math.pi)
    pattern: Pattern = Field(default_factory=CheckerPattern)
    seed: NonNegativeInt = 0

    @field_validator('window')
    @classmethod
    def _window_holds_differences(cls, value: tuple[int, int]) -> tuple[int, int]:
        if min(value) < 2:  # noqa: PLR2004
            raise ValueError('window needs at least 2 samples per axis')
        return value

    @model_validator(mode='after')
    def _extent_within_window(self) -> PhantomSpec:
        if any(e > w for e, w in zip(self.support_extent, self.window)):
            raise ValueError(
                f'support {self.support_extent} larger than window {self.window}'
            )
        return self


class NoiseSpec(_Frozen):
    photons_per_pixel: PositiveFloat
    seed: NonNegativeInt = 0
