import pytest

pytest.importorskip('nomad')

from nomad.client import normalize_all  # noqa: E402
from nomad.datamodel import EntryArchive, EntryMetadata  # noqa: E402

from nomad_phase_retrieval.schema_packages.phase_retrieval_schema import (  # noqa: E402
    PhaseRetrievalRun,
)
from nomad_phase_retrieval.solver import (  # noqa: E402
    IterationRecord,
    IterationTrace,
)


def make_trace(zetas, errors=None):
    trace = IterationTrace(engine='cgpr', zeta_target=2.0)
    for n, zeta in enumerate(zetas, start=1):
        trace.append(
            IterationRecord(
                iter=n,
                zeta=zeta,
                error_sq=None if errors is None else errors[n - 1],
                tv=10.0,
                tv_substeps=2,
                elapsed_ms=0.5,
            )
        )
    return trace


def normalized(run):
    archive = EntryArchive(data=run, metadata=EntryMetadata(entry_name='run'))
    normalize_all(archive)
    return archive.data


def test_summary_values_after_normalization():
    run = PhaseRetrievalRun()
    run.fill_from_trace(make_trace([3.0, 2.5, 2.0], errors=[0.4, 0.2, 0.3]))
    run = normalized(run)

    assert run.engine == 'cgpr'
    assert run.n_iterations == 3  # noqa: PLR2004
    assert run.final_zeta == pytest.approx(2.0)
    assert run.final_error_sq == pytest.approx(0.3)
    assert run.min_error_sq == pytest.approx(0.2)
    assert run.total_tv_substeps == 6  # noqa: PLR2004
    assert run.stagnation_ratio == pytest.approx(1.25)


def test_entered_target_enables_stagnation_ratio():
    run = PhaseRetrievalRun()
    run.fill_from_trace(make_trace([5.0, 5.0]))
    run.zeta_target = 4.0
    run = normalized(run)
    assert run.stagnation_ratio == pytest.approx(1.25)
    assert run.final_error_sq is None


def test_round_trip_through_trace():
    trace = make_trace([1.0, 2.0], errors=[0.5, 0.25])
    run = PhaseRetrievalRun()
    run.fill_from_trace(trace)
    back = run.to_trace()
    assert [r.zeta for r in back.records] == [1.0, 2.0]
    assert [r.error_sq for r in back.records] == [0.5, 0.25]


def test_empty_run_normalizes_quietly():
    run = normalized(PhaseRetrievalRun())
    assert run.n_iterations is None
