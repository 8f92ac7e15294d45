from typing import TYPE_CHECKING, Optional

import numpy as np
from nomad.datamodel.data import EntryData
from nomad.datamodel.metainfo.annotations import ELNAnnotation, ELNComponentEnum
from nomad.metainfo import MEnum, Quantity, SchemaPackage

from nomad_phase_retrieval.solver import (
    IterationRecord,
    IterationTrace,
    error_db,
    stagnation_ratio,
)

if TYPE_CHECKING:
    from nomad.datamodel import EntryArchive
    from structlog.stdlib import BoundLogger

m_package = SchemaPackage()

ENGINES = ['hio', 'cgpr', 'fixed_tv', 'unknown']


class PhaseRetrievalRun(EntryData):
    """
    One reconstruction run of an iterative phase retrieval engine, stored as its
    per-iteration trace plus summary values filled in on normalization.
    """

    engine = Quantity(
        type=MEnum(*ENGINES),
        description='Engine that produced the trace: plain hybrid input-output '
        '(hio), complexity-guided phase retrieval (cgpr) or HIO with a fixed '
        'number of unguided total-variation steps (fixed_tv).',
    )
    zeta_target = Quantity(
        type=np.float64,
        description='Complexity estimated from the measured Fourier magnitude. '
        'The trace file does not carry it; enter it to obtain the stagnation ratio.',
        a_eln=ELNAnnotation(component=ELNComponentEnum.NumberEditQuantity),
    )
    iteration = Quantity(
        type=np.int32,
        shape=['*'],
        description='Outer iteration index, contiguous from 1.',
    )
    zeta = Quantity(
        type=np.float64,
        shape=['*'],
        description='Image-domain complexity of the iterate after each iteration.',
    )
    error_sq = Quantity(
        type=np.float64,
        shape=['*'],
        description='Normalized object-domain error against the ground truth, '
        'minimized over the twin image. Only present for synthetic runs.',
    )
    tv = Quantity(
        type=np.float64,
        shape=['*'],
        description='Isotropic total variation of the iterate.',
    )
    tv_substeps = Quantity(
        type=np.int32,
        shape=['*'],
        description='Total-variation descent steps taken inside each iteration.',
    )
    elapsed_ms = Quantity(
        type=np.float64,
        shape=['*'],
        unit='ms',
        description='Wall time spent in each iteration.',
    )

    n_iterations = Quantity(type=np.int32, description='Length of the trace.')
    final_zeta = Quantity(type=np.float64, description='Complexity at the last iteration.')
    final_error_sq = Quantity(
        type=np.float64, description='Normalized error at the last iteration.'
    )
    final_error_db = Quantity(
        type=np.float64, description='Final normalized error as 10*log10(E^2).'
    )
    min_error_sq = Quantity(
        type=np.float64, description='Smallest normalized error along the trace.'
    )
    total_tv_substeps = Quantity(
        type=np.int32, description='Sum of total-variation steps over the run.'
    )
    stagnation_ratio = Quantity(
        type=np.float64,
        description='Mean complexity over the last 100 iterations divided by '
        '`zeta_target`. Values well above 1 flag an iterate stuck in a '
        'high-complexity state.',
    )

    def fill_from_trace(self, trace: IterationTrace) -> None:
        self.engine = trace.engine if trace.engine in ENGINES else 'unknown'
        if trace.zeta_target:
            self.zeta_target = trace.zeta_target
        self.iteration = [r.iter for r in trace.records]
        self.zeta = trace.zetas()
        if trace.has_error:
            self.error_sq = [r.error_sq for r in trace.records]
        self.tv = [r.tv for r in trace.records]
        self.tv_substeps = [r.tv_substeps for r in trace.records]
        self.elapsed_ms = [r.elapsed_ms for r in trace.records]

    def to_trace(self) -> Optional[IterationTrace]:
        if self.zeta is None or not len(self.zeta):
            return None
        n = len(self.zeta)
        errors = self.error_sq if self.error_sq is not None else [None] * n
        substeps = self.tv_substeps if self.tv_substeps is not None else [0] * n
        tvs = self.tv if self.tv is not None else [np.nan] * n
        trace = IterationTrace(engine=self.engine or 'unknown')
        for i in range(n):
            trace.append(
                IterationRecord(
                    iter=i + 1,
                    zeta=float(self.zeta[i]),
                    error_sq=None if errors[i] is None else float(errors[i]),
                    tv=float(tvs[i]),
                    tv_substeps=int(substeps[i]),
                    elapsed_ms=0.0,
                )
            )
        return trace

    def _set_summary(self, trace: IterationTrace) -> None:
        final = trace.final
        self.n_iterations = len(trace)
        self.final_zeta = final.zeta
        self.total_tv_substeps = sum(r.tv_substeps for r in trace.records)
        if final.error_sq is not None:
            self.final_error_sq = final.error_sq
            db = error_db(final.error_sq)
            if np.isfinite(db):
                self.final_error_db = db
            self.min_error_sq = min(r.error_sq for r in trace.records)
        if self.zeta_target:
            self.stagnation_ratio = stagnation_ratio(trace, float(self.zeta_target))

    def normalize(self, archive: 'EntryArchive', logger: 'BoundLogger') -> None:
        super().normalize(archive, logger)
        trace = self.to_trace()
        if trace is None:
            logger.warning('empty_phase_retrieval_run')
            return
        self._set_summary(trace)
        if archive.metadata is not None and not archive.metadata.entry_name:
            archive.metadata.entry_name = f'{self.engine} run ({len(trace)} iterations)'


m_package.__init_metainfo__()
