from nomad.config.models.plugins import SchemaPackageEntryPoint


class PhaseRetrievalSchemaEntryPoint(SchemaPackageEntryPoint):
    """Entry-point that returns the phase retrieval run schema package."""

    def load(self):
        from nomad_phase_retrieval.schema_packages.phase_retrieval_schema import (
            m_package,
        )

        return m_package


phase_retrieval_schema = PhaseRetrievalSchemaEntryPoint(
    name='phase_retrieval_schema',
    description='Metainfo schema package for HIO / CGPR reconstruction runs.',
)
