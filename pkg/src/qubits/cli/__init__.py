"""
CLI package for qubits - run configuration, pipelines, evaluation and rendering
"""

from .run_config import RunConfig
from .evaluation import overlap_diagnostic, run_eval
from .pipeline import run_cluster, run_baseline, run_mds, run_synth, run_qubo_export
from .interface import ReportRenderer

__all__ = [
    'RunConfig', 'overlap_diagnostic', 'run_eval',
    'run_cluster', 'run_baseline', 'run_mds', 'run_synth', 'run_qubo_export',
    'ReportRenderer'
]
