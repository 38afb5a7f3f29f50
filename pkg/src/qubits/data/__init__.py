"""
Data package for qubits - ingestion, preprocessing and synthetic frame stacks
"""

from .dataset_io import (
    Dataset,
    load_csv,
    load_frames,
    write_frames,
    read_input,
    standardize,
    center_rows,
    crop_region,
)
from .synthkarman import SynthSpec, generate, clean_signal

__all__ = [
    'Dataset', 'load_csv', 'load_frames', 'write_frames', 'read_input',
    'standardize', 'center_rows', 'crop_region',
    'SynthSpec', 'generate', 'clean_signal'
]
