from __future__ import annotations

from pathlib import Path
from typing import Optional

from nomad.datamodel import EntryArchive
from nomad.parsing import MatchingParser

from nomad_phase_retrieval.io import read_trace_csv
from nomad_phase_retrieval.schema_packages.phase_retrieval_schema import (
    PhaseRetrievalRun,
)

ENGINE_PREFIXES = ('fixed_tv_', 'cgpr_', 'hio_')


def engine_from_filename(name: str) -> str:
    """``cgpr_seed3.pr_trace.csv`` -> ``cgpr``; anything else -> ``unknown``."""
    for prefix in ENGINE_PREFIXES:
        if name.startswith(prefix):
            return prefix.rstrip('_')
    return 'unknown'


class TraceParser(MatchingParser):
    """Parse the per-iteration trace CSV written by the hio / cgpr commands."""

    def parse(
        self,
        mainfile: str,
        archive: EntryArchive,
        logger=None,
        child_archives: Optional[dict[str, EntryArchive]] = None,
    ) -> None:
        path = Path(mainfile)
        engine = engine_from_filename(path.name)
        trace = read_trace_csv(path, engine=engine)

        run = PhaseRetrievalRun()
        run.fill_from_trace(trace)
        archive.data = run
        logger and logger.info(
            'trace_parsed', file=path.name, engine=engine, iterations=len(trace)
        )
