"""
Synthetic periodic frame stacks with the statistics of a noisy PSP recording

Each frame is a normalized pressure field

    1 + amplitude * (sin(phi_t) * P1 + cos(phi_t) * P2) + noise

where P1 and P2 are orthogonal, zero-mean, unit-RMS travelling-wave patterns.
Noise-free frames therefore lie on an exact circle once the DC level is
removed, which makes the phase structure checkable against known truth.
SNR is RMS based: the temporal RMS of the fluctuation equals ``amplitude`` and
the default ``noise_sigma`` equals ``amplitude``.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..utils.errors import InputError
from ..utils.logger import get_logger
from .dataset_io import Dataset

logger = get_logger(__name__)


@dataclass(frozen=True)
class SynthSpec:
    """Parameters of a synthetic vortex-shedding frame stack"""
    n_frames: int = 270
    height: int = 64
    width: int = 64
    n_periods: float = 12.7
    amplitude: float = 0.02
    noise_sigma: Optional[float] = None  # None -> amplitude (SNR ~ 1)
    seed: int = 0
    wavenumber: int = 2  # streamwise wavelengths across the frame

    def __post_init__(self):
        if self.n_frames < 2:
            raise InputError("n_frames must be at least 2", n_frames=self.n_frames)
        if self.height < 1 or self.width < 3:
            raise InputError("frames need height >= 1 and width >= 3",
                             height=self.height, width=self.width)
        if self.n_periods <= 0:
            raise InputError("n_periods must be positive", n_periods=self.n_periods)
        if self.amplitude <= 0:
            raise InputError("amplitude must be positive", amplitude=self.amplitude)
        if self.sigma < 0:
            raise InputError("noise_sigma must be non-negative", noise_sigma=self.noise_sigma)

    @property
    def sigma(self) -> float:
        return self.amplitude if self.noise_sigma is None else float(self.noise_sigma)

    @property
    def frame_shape(self) -> Tuple[int, int]:
        return (self.height, self.width)

    def phases(self) -> np.ndarray:
        """True phase of every frame, in [0, 2*pi)"""
        t = np.arange(self.n_frames, dtype=np.float64)
        return np.mod(2.0 * np.pi * self.n_periods * t / self.n_frames, 2.0 * np.pi)


def spatial_patterns(spec: SynthSpec) -> Tuple[np.ndarray, np.ndarray]:
    """
    The two flattened spatial patterns (P1, P2)

    A streamwise sine/cosine pair under a cross-stream Gaussian envelope.
    Integer wavenumbers below width/2 make both patterns exactly zero-mean and
    mutually orthogonal on the pixel grid.
    """
    kappa = max(1, min(spec.wavenumber, (spec.width - 1) // 2))
    x = np.arange(spec.width) / spec.width
    y = (np.arange(spec.height) + 0.5) / spec.height
    envelope = np.exp(-((y - 0.5) / 0.3) ** 2)

    p1 = np.outer(envelope, np.sin(2.0 * np.pi * kappa * x)).ravel()
    p2 = np.outer(envelope, np.cos(2.0 * np.pi * kappa * x)).ravel()
    p1 /= np.sqrt(np.mean(p1 ** 2))
    p2 /= np.sqrt(np.mean(p2 ** 2))
    return p1, p2


def clean_signal(spec: SynthSpec) -> np.ndarray:
    """Noise-free frames, shape (n_frames, height*width)"""
    phases = spec.phases()
    p1, p2 = spatial_patterns(spec)
    fluctuation = np.outer(np.sin(phases), p1) + np.outer(np.cos(phases), p2)
    return 1.0 + spec.amplitude * fluctuation


def generate(spec: SynthSpec) -> Tuple[Dataset, np.ndarray]:
    """
    Generate a noisy frame stack

    Args:
        spec: generator parameters

    Returns:
        (Dataset with frame_shape set, true phases)
    """
    frames = clean_signal(spec)
    sigma = spec.sigma
    if sigma > 0:
        # one substream per frame keeps every frame reproducible on its own
        streams = np.random.SeedSequence(spec.seed).spawn(spec.n_frames)
        for t, stream in enumerate(streams):
            frames[t] += np.random.default_rng(stream).normal(0.0, sigma, size=frames.shape[1])

    logger.info(
        f"Generated {spec.n_frames} frames of {spec.height}x{spec.width}, "
        f"amplitude={spec.amplitude}, noise_sigma={sigma}, periods={spec.n_periods}"
    )
    return Dataset(data=frames, frame_shape=spec.frame_shape), spec.phases()
