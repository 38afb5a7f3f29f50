"""
Error types for qubits

Every error carries an exit code for the CLI and a ``details`` mapping that is
emitted verbatim in the machine-readable error JSON.
"""

from typing import Any, Dict, Optional


class QubitsError(Exception):
    """Base class for all qubits errors"""

    exit_code = 1

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details: Dict[str, Any] = details

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for the error JSON"""
        return {
            "type": self.__class__.__name__,
            "message": self.message,
            "details": self.details,
        }


class InputError(QubitsError, ValueError):
    """Usage or input problem (exit code 2)"""

    exit_code = 2


class ComputationError(QubitsError):
    """Numerical or model problem (exit code 1)"""

    exit_code = 1


# Input errors

class DataFormatError(InputError):
    """Structurally malformed input, e.g. ragged CSV rows"""

    def __init__(self, message: str, row: Optional[int] = None, **details: Any):
        super().__init__(message, row=row, **details)
        self.row = row


class DataParseError(InputError):
    """A cell that does not parse as a finite number (or integer label)"""

    def __init__(self, message: str, row: int, col: int, **details: Any):
        super().__init__(message, row=row, col=col, **details)
        self.row = row
        self.col = col


class InsufficientDataError(InputError):
    """Fewer than two samples"""


class FrameFormatError(InputError):
    """FSK1 magic/version or size mismatch"""


class ConfigError(InputError):
    """Invalid run configuration"""


class DigestMismatchError(InputError):
    """Two reports refer to different datasets"""


# Computation errors

class RankError(ComputationError, ValueError):
    """Truncation rank out of range"""


class DecompositionError(ComputationError, RuntimeError):
    """SVD / eigendecomposition did not produce a usable result"""


class MetricError(ComputationError, ValueError):
    """Similarity could not be computed (zero-norm row, wrong kind)"""


class ModelError(ComputationError, ValueError):
    """Invalid QUBO model input or bitstring"""


class SolverError(ComputationError, ValueError):
    """Invalid solver parameters or a failed self-check"""


class MatchingError(ComputationError, ValueError):
    """Cluster/class matching not possible"""


class EmbeddingError(ComputationError, RuntimeError):
    """Degenerate MDS geometry"""


class DiagnosticError(ComputationError, ValueError):
    """Overlap diagnostic not defined for the given input"""
