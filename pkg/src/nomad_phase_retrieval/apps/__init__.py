from __future__ import annotations

from nomad.config.models.plugins import AppEntryPoint
from nomad.config.models.ui import (
    App,
    Axis,
    Column,
    Dashboard,
    Layout,
    Menu,
    MenuItemHistogram,
    MenuItemTerms,
    SearchQuantities,
    WidgetHistogram,
    WidgetScatterPlot,
)

SCHEMA = 'nomad_phase_retrieval.schema_packages.phase_retrieval_schema.PhaseRetrievalRun'

phase_retrieval_app = AppEntryPoint(
    name='phase_retrieval_app',
    description='Compare HIO and complexity-guided phase retrieval runs.',
    app=App(
        # -------------- overview page ----------
        label='Phase Retrieval Runs',
        path='phaseretrieval',
        category='Use Cases',
        description='Iteration traces of HIO and CGPR reconstructions.',
        readme=(
            'Each entry is one *.pr_trace.csv written by the hio, cgpr or compare '
            'commands. Filter by engine and compare final error and complexity.'
        ),
        # ---------------------------- search index -------------------------
        search_quantities=SearchQuantities(include=[f'data.*#{SCHEMA}']),
        # ---------------------------- fixed filters ------------------------
        filters_locked={'section_defs.definition_qualified_name': [SCHEMA]},
        # ---------------------------- result table -------------------------
        columns=[
            Column(quantity=f'data.engine#{SCHEMA}', label='Engine', selected=True),
            Column(
                quantity=f'data.n_iterations#{SCHEMA}',
                label='Iterations',
                selected=True,
            ),
            Column(
                quantity=f'data.final_zeta#{SCHEMA}',
                label='Final complexity',
                selected=True,
            ),
            Column(
                quantity=f'data.final_error_db#{SCHEMA}',
                label='Final error (dB)',
                selected=True,
            ),
            Column(
                quantity=f'data.stagnation_ratio#{SCHEMA}',
                label='Stagnation ratio',
            ),
            Column(
                quantity=f'data.total_tv_substeps#{SCHEMA}',
                label='TV steps',
            ),
            Column(quantity='entry_id', label='Entry ID'),
            Column(quantity='upload_create_time', label='Upload time'),
        ],
        # ------------------------------ menu -----------------------------
        menu=Menu(
            title='Filters',
            items=[
                MenuItemTerms(quantity=f'data.engine#{SCHEMA}', title='Engine'),
                MenuItemHistogram(
                    x=f'data.final_error_db#{SCHEMA}', title='Final error (dB)'
                ),
                MenuItemHistogram(
                    x=f'data.stagnation_ratio#{SCHEMA}', title='Stagnation ratio'
                ),
            ],
        ),
        # ---------------------------- dashboard ----------------------------
        dashboard=Dashboard(
            widgets=[
                WidgetHistogram(
                    title='Final error distribution',
                    x=f'data.final_error_db#{SCHEMA}',
                    n_bins=50,
                    autorange=True,
                    layout={
                        'md': Layout(w=6, h=4, x=0, y=0, minW=3, minH=3),
                        'lg': Layout(w=6, h=5, x=0, y=0, minW=5, minH=4),
                    },
                ),
                WidgetHistogram(
                    title='Final complexity distribution',
                    x=f'data.final_zeta#{SCHEMA}',
                    n_bins=50,
                    autorange=True,
                    layout={
                        'md': Layout(w=6, h=4, x=6, y=0, minW=3, minH=3),
                        'lg': Layout(w=6, h=5, x=6, y=0, minW=5, minH=4),
                    },
                ),
                WidgetScatterPlot(
                    title='Final error vs stagnation ratio',
                    x=Axis(
                        search_quantity=f'data.stagnation_ratio#{SCHEMA}',
                        title='Stagnation ratio',
                    ),
                    y=Axis(
                        search_quantity=f'data.final_error_db#{SCHEMA}',
                        title='Final error (dB)',
                    ),
                    size=800,
                    autorange=True,
                    layout={
                        'md': Layout(w=6, h=6, x=12, y=0, minW=3, minH=3),
                        'lg': Layout(w=9, h=8, x=12, y=0, minW=6, minH=6),
                    },
                ),
            ],
        ),
    ),
)
