"""
Encoder Configuration
=====================

All of the hyperparameters of the encoder live in one immutable
:class:`EncoderConfig`. Settings that are not provided fall back to
defaults that match a six dimension embedding split into three subspaces
with a fully reversible target.

"""
import dataclasses
import enum
import logging
import math
import os
import typing

from logoquant import exceptions

LOGGER = logging.getLogger(__name__)

THREADS_ENV = 'LOGOQUANT_THREADS'

Settings = typing.Dict[str, typing.Any]


class SeedingMode(enum.Enum):
    """Centroid seeding for the sub-quantizers"""
    KMEANSPP = 'pq'
    DAPQ = 'dapq'


class DensityMode(enum.Enum):
    """How the kernel density enters the seeding probability"""
    RAW = 'raw'
    LOG = 'log'


class Strategy(enum.Enum):
    """Cluster count search strategy"""
    UNIFORM_K = 'uniform'
    PER_SUBSPACE = 'per-subspace'


class SearchSpace(enum.Enum):
    """Where the decoder looks for the nearest word"""
    CODEWORD = 'codeword'
    EMBEDDING = 'embedding'


_ENUMS = {
    'density': DensityMode,
    'mode': SeedingMode,
    'strategy': Strategy
}


@dataclasses.dataclass(frozen=True)
class EncoderConfig:
    """Hyperparameters for fitting a codebook and encoding a corpus"""
    m: int = 3
    dod_target: float = 1.0
    eta: int = 8
    b: float = 1.0
    f_ct: float = 0.0
    bandwidth: typing.Optional[float] = None
    seed: int = 42
    mode: SeedingMode = SeedingMode.DAPQ
    density: DensityMode = DensityMode.RAW
    strategy: Strategy = Strategy.UNIFORM_K
    max_rounds: int = 1000
    max_iterations: int = 100
    threads: int = 0

    def __post_init__(self):
        if self.m < 1:
            raise exceptions.ConfigurationError('m must be at least 1')
        if not 0.0 < self.dod_target <= 1.0:
            raise exceptions.ConfigurationError(
                'dod_target must be in (0, 1], got {}'.format(
                    self.dod_target))
        if self.eta < 1:
            raise exceptions.ConfigurationError('eta must be at least 1')
        if self.b <= 0:
            raise exceptions.ConfigurationError('b must be positive')
        if self.f_ct < 0 or math.isnan(self.f_ct):
            raise exceptions.ConfigurationError(
                'f_ct must be a non-negative frequency')
        if self.bandwidth is not None and not self.bandwidth > 0:
            raise exceptions.ConfigurationError('bandwidth must be positive')
        if self.seed < 0:
            raise exceptions.ConfigurationError('seed must be non-negative')
        if self.max_rounds < 1 or self.max_iterations < 1:
            raise exceptions.ConfigurationError(
                'max_rounds and max_iterations must be at least 1')

    def as_dict(self) -> Settings:
        """Return the machine independent snapshot of the configuration

        The thread count is left out so that codebooks trained on different
        hosts carry the same snapshot.

        """
        snapshot = {}
        for field in dataclasses.fields(self):
            if field.name == 'threads':
                continue
            value = getattr(self, field.name)
            if isinstance(value, enum.Enum):
                value = value.value
            elif isinstance(value, float) and math.isinf(value):
                value = 'inf'
            snapshot[field.name] = value
        return snapshot

    def replace(self, **changes) -> 'EncoderConfig':
        """Return a copy with ``changes`` applied"""
        return dataclasses.replace(self, **_coerce(changes))


def from_settings(settings: typing.Optional[Settings] = None) \
        -> EncoderConfig:
    """Build a configuration, applying defaults for non-configured values.

    Enumerated values may be given by their string values, frequencies
    may be given as ``"inf"``. Unknown keys are rejected.

    :param settings: Settings, typically read from a configuration file
    :raises: logoquant.exceptions.ConfigurationError

    """
    settings = dict(settings or {})
    names = {field.name for field in dataclasses.fields(EncoderConfig)}
    unknown = sorted(set(settings) - names)
    if unknown:
        raise exceptions.ConfigurationError(
            'Unknown settings: {}'.format(', '.join(unknown)))
    settings.setdefault('threads', threads_from_environment())
    return EncoderConfig(**_coerce(settings))


def threads_from_environment() -> int:
    """Return the worker cap from ``LOGOQUANT_THREADS``, 0 meaning auto"""
    value = os.environ.get(THREADS_ENV, '0').strip() or '0'
    try:
        threads = int(value)
    except ValueError:
        raise exceptions.ConfigurationError(
            '{} must be an integer, got {!r}'.format(THREADS_ENV, value))
    if threads < 0:
        raise exceptions.ConfigurationError(
            '{} must not be negative'.format(THREADS_ENV))
    return threads


def resolve_threads(threads: int, tasks: int) -> int:
    """Return the number of workers to use for ``tasks`` independent tasks

    :param threads: Configured worker count, 0 meaning one per CPU
    :param tasks: The number of tasks to run

    """
    if threads <= 0:
        threads = os.cpu_count() or 1
    return max(1, min(threads, tasks))


def _coerce(settings: Settings) -> Settings:
    coerced = {}
    for key, value in settings.items():
        if key in _ENUMS and not isinstance(value, enum.Enum):
            try:
                value = _ENUMS[key](value)
            except ValueError:
                raise exceptions.ConfigurationError(
                    'Invalid {}: {!r}'.format(key, value))
        elif key in ('f_ct', 'b', 'dod_target') and isinstance(value, str):
            try:
                value = float(value)
            except ValueError:
                raise exceptions.ConfigurationError(
                    'Invalid {}: {!r}'.format(key, value))
        coerced[key] = value
    return coerced
