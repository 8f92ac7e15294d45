from nomad.config.models.plugins import ParserEntryPoint


class TraceParserEntryPoint(ParserEntryPoint):
    def load(self):
        from nomad_phase_retrieval.parsers.trace_parser import TraceParser

        return TraceParser(**self.dict())


trace_parser = TraceParserEntryPoint(
    name='trace_parser',
    description='Parser for per-iteration phase retrieval trace CSV files.',
    mainfile_name_re=r'.*\.pr_trace\.csv$',
    mainfile_contents_re=r'^iter,zeta,error_sq,tv,tv_substeps,elapsed_ms',
)
