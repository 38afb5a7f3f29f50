"""
Resolved configuration of one qubits run
"""

from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, ValidationError, field_validator

from ..utils.errors import ConfigError

Subcommand = Literal["cluster", "baseline", "synth", "mds", "eval", "qubo-export"]


class RunConfig(BaseModel):
    """Every setting that influences a run's output; embedded in its report"""
    subcommand: Subcommand
    inputs: List[str] = Field(default_factory=list, description="Input data or report paths")
    labels: bool = Field(False, description="First CSV column is an integer class label")
    header: bool = Field(False, description="Skip one CSV header line")

    # preprocessing; None means "pick the default for the input type"
    metric: Optional[Literal["cosine", "inv-euclid"]] = None
    standardize: Optional[Literal["row", "global", "none"]] = None
    center: Optional[bool] = None
    svd_rank: Optional[int] = Field(None, description="Truncation rank, 0 disables denoising")
    roi: Optional[Tuple[int, int, int, int]] = Field(None, description="x0, y0, x1, y1 crop")

    # model
    k: Optional[int] = None
    lambda_regime: Literal["strict", "outlier-permitting"] = "strict"
    lambda1: Optional[float] = None
    lambda2: Optional[float] = None
    no_balance: bool = False

    # solver
    solver: Literal["anneal", "brute-force"] = "anneal"
    move_set: Literal["reassign", "flip"] = "reassign"
    sweeps: Optional[int] = None
    restarts: Optional[int] = None
    t_initial: Optional[float] = None
    t_final: Optional[float] = None
    seed: int = 0
    threads: Optional[int] = None
    solution: Optional[str] = Field(None, description="Decode this bitstring instead of solving")
    debug: bool = False

    # baseline
    n_init: Optional[int] = None
    max_iter: Optional[int] = None

    # synthetic frames
    n_frames: int = 270
    height: int = 64
    width: int = 64
    n_periods: float = 12.7
    amplitude: float = 0.02
    noise_sigma: Optional[float] = None
    wavenumber: int = 2
    phases_path: Optional[str] = None
    clean_path: Optional[str] = None

    # outputs
    output: Optional[str] = None
    dump_spectrum: Optional[str] = None
    dump_similarity: Optional[str] = None
    dump_mds: Optional[str] = None
    dump_means: Optional[str] = None

    @field_validator("k", "sweeps", "restarts", "n_init", "max_iter")
    @classmethod
    def _positive(cls, value):
        if value is not None and value < 1:
            raise ValueError("must be at least 1")
        return value

    @field_validator("lambda1", "lambda2", "svd_rank", "threads")
    @classmethod
    def _non_negative(cls, value):
        if value is not None and value < 0:
            raise ValueError("must be non-negative")
        return value

    @field_validator("seed")
    @classmethod
    def _seed_range(cls, value):
        if not 0 <= value < 2 ** 64:
            raise ValueError("must be a 64-bit unsigned integer")
        return value

    def to_json(self) -> str:
        return self.model_dump_json()

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            return cls.model_validate_json(text)
        except ValidationError as e:
            raise ConfigError(f"invalid run configuration: {e.error_count()} error(s)",
                              errors=_error_list(e)) from e

    @classmethod
    def create(cls, **values) -> "RunConfig":
        """Build from CLI values, mapping validation failures to ConfigError"""
        try:
            return cls(**values)
        except ValidationError as e:
            raise ConfigError(f"invalid run configuration: {e.error_count()} error(s)",
                              errors=_error_list(e)) from e


def _error_list(e: ValidationError):
    return [
        {"field": ".".join(str(part) for part in error["loc"]), "message": error["msg"]}
        for error in e.errors()
    ]
