"""
Product Quantization
====================

Splits vectors into ``m`` contiguous subvectors and quantizes every
subspace separately. Sub-codebooks are trained with k-means++ seeding,
optionally reweighted by a Gaussian kernel density estimate, followed by
Lloyd refinement.

"""
import concurrent.futures
import dataclasses
import logging
import math
import typing

import numpy as np
from sklearn import neighbors

from logoquant import config, embedding, exceptions, storage, transcoders

LOGGER = logging.getLogger(__name__)

FORMAT_VERSION = 1

KDE_SUBSAMPLE_THRESHOLD = 50000
KDE_REFERENCE_POINTS = 10000
KDE_SUBSAMPLE_SEED = 0
LOG_DENSITY_EPSILON = 1e-6

CodeTuple = typing.Tuple[int, ...]


@dataclasses.dataclass(frozen=True)
class SubspacePartition:
    """Contiguous split of ``m * sub_dim`` dimensions into ``m`` blocks"""
    m: int
    sub_dim: int

    def __post_init__(self):
        if self.m < 1 or self.sub_dim < 1:
            raise exceptions.PartitionError(
                'm and sub_dim must be at least 1')

    @classmethod
    def for_dimension(cls, dim: int, m: int) -> 'SubspacePartition':
        """Return the partition of ``dim`` dimensions into ``m`` subspaces

        :raises: logoquant.exceptions.PartitionError

        """
        if m < 1 or dim % m:
            raise exceptions.PartitionError(
                'Dimension {} is not divisible into {} subspaces'.format(
                    dim, m))
        return cls(m, dim // m)

    @property
    def dim(self) -> int:
        """The full vector dimension"""
        return self.m * self.sub_dim

    def bounds(self, index: int) -> typing.Tuple[int, int]:
        """Return the ``[start, stop)`` dimensions of subspace ``index``"""
        return index * self.sub_dim, (index + 1) * self.sub_dim


@dataclasses.dataclass(frozen=True)
class LloydResult:
    """Outcome of Lloyd refinement in one subspace"""
    centroids: np.ndarray
    assignments: np.ndarray
    distortion_trace: typing.List[float]


class Codebook:
    """Trained sub-codebooks, one ``(k_i, sub_dim)`` array per subspace

    :param partition: The subspace partition
    :param sub_codebooks: The centroids of every subspace
    :param training_config: Snapshot of the settings used for training
    :param version: Format version tag

    """

    __slots__ = ('partition', 'sub_codebooks', 'training_config', 'version')

    def __init__(self,
                 partition: SubspacePartition,
                 sub_codebooks: typing.Sequence[np.ndarray],
                 training_config: typing.Optional[dict] = None,
                 version: int = FORMAT_VERSION):
        if len(sub_codebooks) != partition.m:
            raise exceptions.PartitionError(
                'Expected {} sub-codebooks, received {}'.format(
                    partition.m, len(sub_codebooks)))
        frozen = []
        for centroids in sub_codebooks:
            centroids = np.array(centroids, dtype=np.float64)
            if centroids.ndim != 2 or centroids.shape[0] < 1 \
                    or centroids.shape[1] != partition.sub_dim:
                raise exceptions.PartitionError(
                    'Sub-codebook shape {} does not match sub_dim {}'.format(
                        centroids.shape, partition.sub_dim))
            if not np.all(np.isfinite(centroids)):
                raise exceptions.QuantizerError('Centroids must be finite')
            centroids.setflags(write=False)
            frozen.append(centroids)
        self.partition = partition
        self.sub_codebooks = tuple(frozen)
        self.training_config = dict(training_config or {})
        self.version = version

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Codebook):
            return NotImplemented
        return (self.partition == other.partition
                and self.training_config == other.training_config
                and all(np.array_equal(a, b) for a, b in zip(
                    self.sub_codebooks, other.sub_codebooks)))

    def __repr__(self) -> str:
        return '{}(m={}, sub_dim={}, ks={})'.format(
            self.__class__.__name__, self.partition.m,
            self.partition.sub_dim, self.ks)

    @property
    def ks(self) -> typing.List[int]:
        """The number of centroids per subspace"""
        return [centroids.shape[0] for centroids in self.sub_codebooks]

    @property
    def m(self) -> int:
        return self.partition.m

    def checksum(self) -> str:
        """Return the SHA-256 digest of the centroids and partition"""
        return storage.bytes_checksum(transcoders.canonical({
            'm': self.partition.m,
            'sub_dim': self.partition.sub_dim,
            'centroids': [[[repr(float(value)) for value in row]
                           for row in centroids]
                          for centroids in self.sub_codebooks]
        }))

    def validate(self, code: typing.Sequence[int]) -> CodeTuple:
        """Return ``code`` as a tuple after checking it against the ks

        :raises: IndexError

        """
        if len(code) != self.partition.m:
            raise IndexError('Code {!r} does not have {} indices'.format(
                tuple(code), self.partition.m))
        for index, (value, limit) in enumerate(zip(code, self.ks)):
            if not 0 <= value < limit:
                raise IndexError(
                    'Index {} of subspace {} is not in [0, {})'.format(
                        value, index, limit))
        return tuple(int(value) for value in code)


def split_subvectors(vector: typing.Sequence[float],
                     partition: SubspacePartition) -> typing.List[np.ndarray]:
    """Split ``vector`` into its ``m`` contiguous subvectors

    :raises: logoquant.exceptions.PartitionError

    """
    vector = np.asarray(vector, dtype=np.float64)
    if vector.ndim != 1 or vector.shape[0] != partition.dim:
        raise exceptions.PartitionError(
            'Vector of length {} does not match {} x {}'.format(
                vector.shape[-1] if vector.ndim else 0, partition.m,
                partition.sub_dim))
    return [vector[start:stop] for start, stop in
            (partition.bounds(index) for index in range(partition.m))]


def scott_bandwidth(points: np.ndarray) -> float:
    """Return Scott's rule bandwidth for ``points``

    ``h = sigma * n ** (-1 / (d + 4))`` with ``sigma`` the mean per
    dimension standard deviation.

    :raises: logoquant.exceptions.DegenerateBandwidth

    """
    count, dim = points.shape
    sigma = float(np.mean(np.std(points, axis=0, ddof=1)))
    if not sigma > 0:
        raise exceptions.DegenerateBandwidth(
            'All points are identical, the automatic bandwidth is zero')
    return sigma * count ** (-1.0 / (dim + 4))


def kde_density(points: np.ndarray,
                bandwidth: typing.Optional[float] = None) -> np.ndarray:
    """Return the Gaussian kernel density at every point

    The kernel is isotropic. A bandwidth of :data:`None` selects Scott's
    rule. Above :data:`KDE_SUBSAMPLE_THRESHOLD` points the density is
    estimated against a fixed seed subsample of reference points.

    :param points: A ``(n, d)`` array with ``n >= 2``
    :param bandwidth: A positive bandwidth or :data:`None` for automatic
    :raises: logoquant.exceptions.QuantizerError

    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points[:, np.newaxis]
    if points.shape[0] < 2:
        raise exceptions.QuantizerError(
            'Kernel density estimation needs at least two points')
    if bandwidth is None:
        bandwidth = scott_bandwidth(points)
    elif not bandwidth > 0:
        raise exceptions.ConfigurationError('bandwidth must be positive')
    reference = points
    if points.shape[0] > KDE_SUBSAMPLE_THRESHOLD:
        rng = np.random.default_rng(KDE_SUBSAMPLE_SEED)
        reference = points[np.sort(rng.choice(
            points.shape[0], KDE_REFERENCE_POINTS, replace=False))]
        LOGGER.debug('Estimating density against %i of %i points',
                     KDE_REFERENCE_POINTS, points.shape[0])
    estimator = neighbors.KernelDensity(
        kernel='gaussian', bandwidth=bandwidth, atol=0.0, rtol=0.0)
    estimator.fit(reference)
    densities = np.exp(estimator.score_samples(points))
    return np.maximum(densities, np.finfo(np.float64).tiny)


def density_weights(densities: np.ndarray,
                    mode: config.DensityMode = config.DensityMode.RAW) \
        -> np.ndarray:
    """Return the seeding weights for ``densities``

    :data:`~logoquant.config.DensityMode.RAW` uses the density itself,
    :data:`~logoquant.config.DensityMode.LOG` uses the shifted log density
    ``max(log p - min log p + eps, eps)``.

    """
    densities = np.asarray(densities, dtype=np.float64)
    if mode is config.DensityMode.RAW:
        return densities
    logs = np.log(densities)
    return np.maximum(logs - logs.min() + LOG_DENSITY_EPSILON,
                      LOG_DENSITY_EPSILON)


def seeding_probabilities(points: np.ndarray,
                          centroids: np.ndarray,
                          weights: typing.Optional[np.ndarray] = None) \
        -> np.ndarray:
    """Return the probability of choosing each point as the next centroid

    The probability is proportional to ``weight * D ** 2`` where ``D`` is
    the distance to the nearest chosen centroid. Without weights this is
    classic k-means++.

    """
    points = np.asarray(points, dtype=np.float64)
    centroids = np.atleast_2d(np.asarray(centroids, dtype=np.float64))
    nearest = _squared_distances(points, centroids).min(axis=1)
    return _probabilities(nearest, weights)


def seed_centroids(points: np.ndarray,
                   k: int,
                   mode: config.SeedingMode,
                   densities: typing.Optional[np.ndarray],
                   rng: np.random.Generator,
                   density: config.DensityMode = config.DensityMode.RAW,
                   first: typing.Optional[int] = None) -> np.ndarray:
    """Choose ``k`` initial centroids from ``points``

    The first centroid is chosen uniformly at random unless ``first`` names
    its row, every following one with probability proportional to
    ``rho * D ** 2`` where ``rho`` is the density weight (1 for k-means++).

    :raises: logoquant.exceptions.TooManyClusters

    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points[:, np.newaxis]
    available = distinct_count(points)
    if not 1 <= k <= available:
        raise exceptions.TooManyClusters(k, available)
    weights = None
    if mode is config.SeedingMode.DAPQ:
        if densities is None:
            raise exceptions.QuantizerError(
                'Density aware seeding requires densities')
        weights = density_weights(densities, density)

    if first is None:
        first = int(rng.integers(points.shape[0]))
    elif not 0 <= first < points.shape[0]:
        raise exceptions.QuantizerError(
            'No row {} among {} points'.format(first, points.shape[0]))
    chosen = [first]
    nearest = _squared_distances(points, points[chosen]).reshape(-1)
    for step in range(1, k):
        probabilities = _probabilities(nearest, weights)
        chosen.append(int(rng.choice(points.shape[0], p=probabilities)))
        nearest = np.minimum(
            nearest,
            _squared_distances(points, points[chosen[-1:]]).reshape(-1))
    LOGGER.debug('Seeded %i centroids (%s)', k, mode.name)
    return points[chosen].copy()


def lloyd(points: np.ndarray,
          initial_centroids: np.ndarray,
          max_iterations: int = 100) -> LloydResult:
    """Refine centroids by alternating assignment and mean updates

    Stops when assignments no longer change or after ``max_iterations``.
    Empty clusters are moved onto the point farthest from its centroid.
    The trace holds the sum of squared distances after every assignment.

    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points[:, np.newaxis]
    centroids = np.array(initial_centroids, dtype=np.float64)
    if centroids.ndim == 1:
        centroids = centroids[:, np.newaxis]
    if centroids.shape[0] < 1 or centroids.shape[1] != points.shape[1]:
        raise exceptions.QuantizerError(
            'Centroids of shape {} do not fit points of dimension {}'.format(
                centroids.shape, points.shape[1]))
    rows = np.arange(points.shape[0])
    assignments, trace, converged = None, [], False
    for iteration in range(max_iterations):
        distances = _squared_distances(points, centroids)
        labels = distances.argmin(axis=1)
        trace.append(float(distances[rows, labels].sum()))
        if assignments is not None and np.array_equal(labels, assignments):
            converged = True
            break
        assignments = labels
        centroids = _update_centroids(points, labels, centroids)
    if not converged:
        distances = _squared_distances(points, centroids)
        assignments = distances.argmin(axis=1)
        trace.append(float(distances[rows, assignments].sum()))
        LOGGER.debug('Lloyd stopped at the %i iteration cap', max_iterations)
    else:
        LOGGER.debug('Lloyd converged after %i iterations', len(trace))
    return LloydResult(centroids, assignments, trace)


def train_subspace(points: np.ndarray,
                   k: int,
                   index: int,
                   seed: int,
                   mode: config.SeedingMode = config.SeedingMode.DAPQ,
                   densities: typing.Optional[np.ndarray] = None,
                   density: config.DensityMode = config.DensityMode.RAW,
                   max_iterations: int = 100) -> LloydResult:
    """Seed and refine the sub-codebook of subspace ``index``

    The random stream is derived from ``seed`` and ``index`` only, so the
    result does not depend on the other subspaces or on execution order.

    """
    rng = subspace_rng(seed, index)
    initial = seed_centroids(points, k, mode, densities, rng, density)
    return lloyd(points, initial, max_iterations)


def subspace_rng(seed: int, index: int) -> np.random.Generator:
    """Return the random generator of subspace ``index``"""
    return np.random.default_rng(
        np.random.SeedSequence(seed, spawn_key=(index,)))


def subspace_points(matrix: typing.Union[embedding.EmbeddingMatrix,
                                         np.ndarray],
                    partition: SubspacePartition,
                    index: int) -> np.ndarray:
    """Return the subvectors of subspace ``index`` for every row"""
    vectors = _vectors(matrix, partition)
    start, stop = partition.bounds(index)
    return vectors[:, start:stop]


def train(matrix: typing.Union[embedding.EmbeddingMatrix, np.ndarray],
          partition: SubspacePartition,
          ks: typing.Sequence[int],
          mode: config.SeedingMode = config.SeedingMode.DAPQ,
          bandwidth: typing.Optional[float] = None,
          seed: int = 42,
          density: config.DensityMode = config.DensityMode.RAW,
          max_iterations: int = 100,
          threads: int = 1,
          densities: typing.Optional[typing.Sequence[np.ndarray]] = None) \
        -> Codebook:
    """Train one sub-codebook per subspace

    Subspaces are independent and may be trained by a pool of ``threads``
    workers, with results identical to sequential training.

    :param matrix: The vectors to quantize
    :param partition: The subspace partition
    :param ks: The number of centroids of every subspace
    :param mode: Seeding mode
    :param bandwidth: KDE bandwidth, :data:`None` for automatic
    :param seed: Master seed
    :param density: How densities enter the seeding probability
    :param max_iterations: Lloyd iteration cap
    :param threads: Worker count, 0 meaning one per CPU
    :param densities: Precomputed per-subspace densities
    :raises: logoquant.exceptions.QuantizerError

    """
    if len(ks) != partition.m:
        raise exceptions.PartitionError(
            'Expected {} cluster counts, received {}'.format(
                partition.m, len(ks)))
    if any(k < 1 for k in ks):
        raise exceptions.QuantizerError('Cluster counts must be positive')
    vectors = _vectors(matrix, partition)

    def work(index: int) -> np.ndarray:
        points = subspace_points(vectors, partition, index)
        subspace_densities = None
        if mode is config.SeedingMode.DAPQ:
            subspace_densities = densities[index] if densities is not None \
                else kde_density(points, bandwidth)
        return train_subspace(points, ks[index], index, seed, mode,
                              subspace_densities, density,
                              max_iterations).centroids

    workers = config.resolve_threads(threads, partition.m)
    if workers == 1:
        sub_codebooks = [work(index) for index in range(partition.m)]
    else:
        with concurrent.futures.ThreadPoolExecutor(workers) as executor:
            sub_codebooks = list(executor.map(work, range(partition.m)))
    LOGGER.info('Trained codebook with ks=%s (%s)', list(ks), mode.name)
    return Codebook(partition, sub_codebooks, {
        'ks': list(ks),
        'mode': mode.value,
        'bandwidth': bandwidth,
        'seed': seed,
        'density': density.value,
        'max_iterations': max_iterations
    })


def quantize(codebook: Codebook, vector: typing.Sequence[float]) \
        -> CodeTuple:
    """Map ``vector`` to the indices of its nearest centroids

    Ties are broken toward the lowest index.

    :raises: logoquant.exceptions.PartitionError

    """
    vector = np.asarray(vector, dtype=np.float64)
    if vector.ndim != 1:
        raise exceptions.PartitionError(
            'Expected a single vector, received shape {}'.format(
                vector.shape))
    return tuple(int(index) for index in
                 quantize_all(codebook, vector[np.newaxis, :])[0])


def quantize_all(codebook: Codebook,
                 matrix: typing.Union[embedding.EmbeddingMatrix,
                                      np.ndarray]) -> np.ndarray:
    """Return the ``(n, m)`` code indices of every row of ``matrix``"""
    vectors = _vectors(matrix, codebook.partition)
    codes = np.empty((vectors.shape[0], codebook.m), dtype=np.int64)
    for index, centroids in enumerate(codebook.sub_codebooks):
        start, stop = codebook.partition.bounds(index)
        codes[:, index] = _squared_distances(
            vectors[:, start:stop], centroids).argmin(axis=1)
    return codes


def reconstruct(codebook: Codebook, code: typing.Sequence[int]) \
        -> np.ndarray:
    """Return the concatenation of the centroids selected by ``code``

    :raises: IndexError

    """
    code = codebook.validate(code)
    return np.concatenate([centroids[index] for centroids, index in
                           zip(codebook.sub_codebooks, code)])


def reconstruct_all(codebook: Codebook, codes: np.ndarray) -> np.ndarray:
    """Return the reconstruction of every row of an ``(n, m)`` code array"""
    codes = np.asarray(codes, dtype=np.int64)
    return np.concatenate([centroids[codes[:, index]] for index, centroids
                           in enumerate(codebook.sub_codebooks)], axis=1)


def subspace_distortions(codebook: Codebook,
                         matrix: typing.Union[embedding.EmbeddingMatrix,
                                              np.ndarray]) -> typing.List[float]:
    """Return the sum of squared subvector errors of every subspace"""
    vectors = _vectors(matrix, codebook.partition)
    errors = (vectors - reconstruct_all(
        codebook, quantize_all(codebook, vectors))) ** 2
    return [float(errors[:, slice(*codebook.partition.bounds(index))].sum())
            for index in range(codebook.m)]


def distortion(codebook: Codebook,
               matrix: typing.Union[embedding.EmbeddingMatrix,
                                    np.ndarray]) -> float:
    """Return the quantization error ``sum ||x - q(x)||^2`` over ``matrix``"""
    return math.fsum(subspace_distortions(codebook, matrix))


def distinct_count(points: np.ndarray) -> int:
    """Return the number of distinct rows of ``points``"""
    return int(np.unique(np.asarray(points), axis=0).shape[0])


def _probabilities(nearest: np.ndarray,
                   weights: typing.Optional[np.ndarray]) -> np.ndarray:
    scores = nearest if weights is None else nearest * weights
    total = scores.sum()
    if not total > 0:
        raise exceptions.QuantizerError('Every seeding weight is zero')
    return scores / total


def _squared_distances(points: np.ndarray,
                       centroids: np.ndarray) -> np.ndarray:
    """Return the ``(n, k)`` squared distances, computed term by term"""
    return ((points[:, np.newaxis, :] - centroids[np.newaxis, :, :])
            ** 2).sum(axis=2)


def _update_centroids(points: np.ndarray,
                      labels: np.ndarray,
                      centroids: np.ndarray) -> np.ndarray:
    k = centroids.shape[0]
    counts = np.bincount(labels, minlength=k)
    sums = np.zeros_like(centroids)
    np.add.at(sums, labels, points)
    updated = centroids.copy()
    filled = counts > 0
    updated[filled] = sums[filled] / counts[filled][:, np.newaxis]
    empty = np.flatnonzero(~filled)
    if empty.size:
        errors = ((points - updated[labels]) ** 2).sum(axis=1)
        candidates = iter(np.argsort(-errors, kind='stable'))
        for cluster in empty:
            for candidate in candidates:
                if errors[candidate] <= 0:
                    break
                if not np.any(np.all(updated == points[candidate], axis=1)):
                    updated[cluster] = points[candidate]
                    LOGGER.debug('Re-seeded empty cluster %i', cluster)
                    break
    return updated


def _vectors(matrix, partition: SubspacePartition) -> np.ndarray:
    vectors = matrix.vectors if isinstance(
        matrix, embedding.EmbeddingMatrix) else np.asarray(
            matrix, dtype=np.float64)
    if vectors.ndim != 2 or vectors.shape[1] != partition.dim:
        raise exceptions.PartitionError(
            'Vectors of shape {} do not match {} x {}'.format(
                vectors.shape, partition.m, partition.sub_dim))
    return vectors
