import pytest

pytest.importorskip('nomad')

from nomad_phase_retrieval.apps import phase_retrieval_app  # noqa: E402


def test_importing_app():
    # this will raise an exception if pydantic model validation fails for the app
    assert phase_retrieval_app.app.label == 'Phase Retrieval Runs'
