"""
Degree of Distinctness
======================

Measures how close the word to code tuple map is to injective, and grows
the number of clusters per subspace until a target degree of distinctness
is reached.

"""
import concurrent.futures
import dataclasses
import logging
import math
import typing

import numpy as np

from logoquant import config, embedding, exceptions, pq

LOGGER = logging.getLogger(__name__)

Matrix = typing.Union[embedding.EmbeddingMatrix, np.ndarray]


@dataclasses.dataclass(frozen=True)
class DodReport:
    """The degree of distinctness of a codebook over a vocabulary"""
    distinct_codewords: int
    vocab_size: int
    b: float
    value: float


@dataclasses.dataclass(frozen=True)
class SearchConfig:
    """Settings for the cluster count search"""
    target: float = 1.0
    eta: int = 8
    b: float = 1.0
    max_rounds: int = 1000
    strategy: config.Strategy = config.Strategy.UNIFORM_K

    def __post_init__(self):
        if not 0.0 < self.target <= 1.0:
            raise exceptions.ConfigurationError(
                'target must be in (0, 1], got {}'.format(self.target))
        if self.eta < 1:
            raise exceptions.ConfigurationError('eta must be at least 1')
        if self.b <= 0:
            raise exceptions.ConfigurationError('b must be positive')
        if self.max_rounds < 1:
            raise exceptions.ConfigurationError(
                'max_rounds must be at least 1')

    @classmethod
    def from_config(cls, settings: config.EncoderConfig) -> 'SearchConfig':
        return cls(settings.dod_target, settings.eta, settings.b,
                   settings.max_rounds, settings.strategy)


@dataclasses.dataclass(frozen=True)
class TraceEntry:
    """One round of the cluster count search"""
    round: int
    ks: typing.Tuple[int, ...]
    distinct_codewords: int
    value: float


FitResult = typing.Tuple[pq.Codebook, DodReport, typing.List[TraceEntry]]


def dod_value(vocab_size: int, distinct: int, b: float) -> float:
    """Return ``e ** (b * (1 - vocab_size / distinct))``

    :raises: ValueError

    """
    if not 1 <= distinct <= vocab_size:
        raise ValueError(
            'Distinct codewords must be in [1, {}], got {}'.format(
                vocab_size, distinct))
    return math.exp(b * (1.0 - vocab_size / distinct))


def degree_of_distinctness(codebook: pq.Codebook,
                           matrix: Matrix,
                           b: float = 1.0) -> DodReport:
    """Count the distinct code tuples of ``matrix`` and evaluate the DoD"""
    codes = pq.quantize_all(codebook, matrix)
    distinct = int(np.unique(codes, axis=0).shape[0])
    return DodReport(distinct_codewords=distinct,
                     vocab_size=codes.shape[0],
                     b=b,
                     value=dod_value(codes.shape[0], distinct, b))


def initial_cluster_count(size: int, m: int) -> int:
    """Return the smallest ``k`` with ``k ** m >= size``"""
    if size < 1 or m < 1:
        raise ValueError('size and m must be at least 1')
    k = max(1, int(round(size ** (1.0 / m))))
    while k ** m < size:
        k += 1
    while k > 1 and (k - 1) ** m >= size:
        k -= 1
    return k


def dictionary_size(ks: typing.Sequence[int]) -> int:
    """Return the number of code symbols, the sum of the cluster counts"""
    return sum(ks)


def vocab_reduction(vocab_size: int, ks: typing.Sequence[int]) -> float:
    """Return the dictionary reduction factor ``|W| / sum(k_i)``"""
    if vocab_size < 1:
        raise ValueError('vocab_size must be at least 1')
    return vocab_size / dictionary_size(ks)


def fit(matrix: Matrix, settings: config.EncoderConfig) -> FitResult:
    """Fit a codebook with the strategy named in ``settings``"""
    search = SearchConfig.from_config(settings)
    method = fit_uniform if search.strategy is config.Strategy.UNIFORM_K \
        else fit_per_subspace
    codebook, report, trace = method(
        matrix, settings.m, search, settings.mode, settings.seed,
        bandwidth=settings.bandwidth, density=settings.density,
        max_iterations=settings.max_iterations, threads=settings.threads)
    snapshot = settings.as_dict()
    snapshot['ks'] = codebook.ks
    return (pq.Codebook(codebook.partition, codebook.sub_codebooks,
                        snapshot),
            report, trace)


def fit_uniform(matrix: Matrix,
                m: int,
                search: SearchConfig,
                mode: config.SeedingMode = config.SeedingMode.DAPQ,
                seed: int = 42,
                **options) -> FitResult:
    """Grow one shared cluster count until the target DoD is reached

    ``k`` starts at the ``m``-th root of the vocabulary size, rounded up,
    and grows by ``eta`` per round. A subspace never receives more
    clusters than it has distinct subvectors.

    :raises: logoquant.exceptions.UnreachableTarget
    :raises: logoquant.exceptions.SearchExhausted

    """
    trainer = _Trainer(matrix, m, mode, seed, **options)
    k = initial_cluster_count(len(trainer.matrix), m)
    trace = []  # type: typing.List[TraceEntry]
    for number in range(search.max_rounds):
        ks = trainer.capped([k] * m)
        codebook = trainer.codebook(ks)
        report = degree_of_distinctness(codebook, trainer.matrix, search.b)
        trace.append(TraceEntry(number, tuple(ks), report.distinct_codewords,
                                report.value))
        LOGGER.debug('Round %i: k=%i, |Q|=%i, DoD=%r', number, k,
                     report.distinct_codewords, report.value)
        if report.value >= search.target:
            LOGGER.info('Reached DoD %r with ks=%s after %i rounds',
                        report.value, ks, number + 1)
            return codebook, report, trace
        if ks == trainer.caps:
            raise trainer.unreachable(search.target, report.value)
        k += search.eta
    raise exceptions.SearchExhausted(
        'DoD target {} not reached in {} rounds'.format(
            search.target, search.max_rounds))


def fit_per_subspace(matrix: Matrix,
                     m: int,
                     search: SearchConfig,
                     mode: config.SeedingMode = config.SeedingMode.DAPQ,
                     seed: int = 42,
                     **options) -> FitResult:
    """Grow the cluster count of one subspace per round

    Every round probes each subspace with ``eta`` more clusters while the
    others are kept, and commits the probe with the largest DoD gain, ties
    going to the lowest subspace index.

    :raises: logoquant.exceptions.UnreachableTarget
    :raises: logoquant.exceptions.SearchExhausted

    """
    trainer = _Trainer(matrix, m, mode, seed, **options)
    ks = trainer.capped([initial_cluster_count(len(trainer.matrix), m)] * m)
    codebook = trainer.codebook(ks)
    report = degree_of_distinctness(codebook, trainer.matrix, search.b)
    trace = [TraceEntry(0, tuple(ks), report.distinct_codewords,
                        report.value)]
    number = 0
    while report.value < search.target:
        number += 1
        if number >= search.max_rounds:
            raise exceptions.SearchExhausted(
                'DoD target {} not reached in {} rounds'.format(
                    search.target, search.max_rounds))
        candidates = [index for index in range(m)
                      if ks[index] < trainer.caps[index]]
        if not candidates:
            raise trainer.unreachable(search.target, report.value)
        probes = []
        for index in candidates:
            probe = list(ks)
            probe[index] = min(probe[index] + search.eta,
                               trainer.caps[index])
            probes.append(probe)
        trainer.prepare(probes)
        best = None
        for index, probe in zip(candidates, probes):
            probe_codebook = trainer.codebook(probe)
            probe_report = degree_of_distinctness(
                probe_codebook, trainer.matrix, search.b)
            LOGGER.debug('Round %i probe %i: ks=%s, DoD gain %r', number,
                         index, probe, probe_report.value - report.value)
            if best is None or probe_report.value > best[2].value:
                best = (probe, probe_codebook, probe_report)
        ks, codebook, report = best
        trace.append(TraceEntry(number, tuple(ks),
                                report.distinct_codewords, report.value))
    LOGGER.info('Reached DoD %r with ks=%s after %i rounds',
                report.value, ks, number + 1)
    return codebook, report, trace


def format_trace(trace: typing.Iterable[TraceEntry]) -> typing.List[str]:
    """Return tab separated ``round, k-vector, |Q|, DoD`` records"""
    return ['{}\t{}\t{}\t{!r}'.format(
        entry.round, ','.join(str(k) for k in entry.ks),
        entry.distinct_codewords, entry.value) for entry in trace]


class _Trainer:
    """Trains and caches sub-codebooks keyed by subspace and cluster count

    A sub-codebook only depends on its subspace, its cluster count and the
    master seed, so cached results are reused across rounds and probes.

    """

    def __init__(self,
                 matrix: Matrix,
                 m: int,
                 mode: config.SeedingMode,
                 seed: int,
                 bandwidth: typing.Optional[float] = None,
                 density: config.DensityMode = config.DensityMode.RAW,
                 max_iterations: int = 100,
                 threads: int = 1):
        if not isinstance(matrix, embedding.EmbeddingMatrix):
            matrix = np.asarray(matrix, dtype=np.float64)
            matrix = embedding.EmbeddingMatrix(
                ['row-{}'.format(row) for row in range(matrix.shape[0])],
                matrix)
        self.matrix = matrix
        self.partition = pq.SubspacePartition.for_dimension(matrix.dim, m)
        self.mode = mode
        self.seed = seed
        self.bandwidth = bandwidth
        self.density = density
        self.max_iterations = max_iterations
        self.threads = threads
        self.points = [pq.subspace_points(matrix, self.partition, index)
                       for index in range(m)]
        self.caps = [pq.distinct_count(points) for points in self.points]
        self._densities = {}  # type: typing.Dict[int, np.ndarray]
        self._centroids = {}  # type: typing.Dict[tuple, np.ndarray]

    def capped(self, ks: typing.Sequence[int]) -> typing.List[int]:
        return [min(k, cap) for k, cap in zip(ks, self.caps)]

    def codebook(self, ks: typing.Sequence[int]) -> pq.Codebook:
        self.prepare([ks])
        return pq.Codebook(
            self.partition,
            [self._centroids[index, k] for index, k in enumerate(ks)],
            {'ks': list(ks), 'mode': self.mode.value, 'seed': self.seed})

    def prepare(self, ks_list: typing.Iterable[typing.Sequence[int]]) -> None:
        """Train every missing sub-codebook, in parallel when allowed"""
        missing = sorted({(index, k) for ks in ks_list
                          for index, k in enumerate(ks)} - set(self._centroids))
        if not missing:
            return
        for index in sorted({index for index, _ in missing}):
            self._densities_for(index)
        workers = config.resolve_threads(self.threads, len(missing))
        if workers == 1:
            results = [self._train(key) for key in missing]
        else:
            with concurrent.futures.ThreadPoolExecutor(workers) as executor:
                results = list(executor.map(self._train, missing))
        self._centroids.update(zip(missing, results))

    def unreachable(self, target: float,
                    achieved: float) -> exceptions.UnreachableTarget:
        return exceptions.UnreachableTarget(
            target, achieved, self.matrix.duplicate_groups())

    def _densities_for(self, index: int) -> typing.Optional[np.ndarray]:
        if self.mode is not config.SeedingMode.DAPQ:
            return None
        if index not in self._densities:
            self._densities[index] = pq.kde_density(self.points[index],
                                                    self.bandwidth)
        return self._densities[index]

    def _train(self, key: typing.Tuple[int, int]) -> np.ndarray:
        index, k = key
        return pq.train_subspace(
            self.points[index], k, index, self.seed, self.mode,
            self._densities_for(index), self.density,
            self.max_iterations).centroids
