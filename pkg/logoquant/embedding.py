"""
Word Embeddings
===============

Loads pretrained word vectors in the GloVe text format and generates
deterministic synthetic vectors for a vocabulary.

"""
import heapq
import logging
import re
import typing

import numpy as np

from logoquant import exceptions, storage, vocab

LOGGER = logging.getLogger(__name__)

MISSING_ERROR = 'error'
MISSING_SYNTHESIZE = 'synthesize'

_NUMBER = re.compile(r'^[+-]?(?:[0-9]+\.?[0-9]*|\.[0-9]+)(?:[eE][+-]?[0-9]+)?$')


class EmbeddingMatrix:
    """Immutable per-word vectors, one row per vocabulary word

    :param words: The words, row ``i`` belongs to ``words[i]``
    :param vectors: A ``(len(words), dim)`` array of finite values

    """

    __slots__ = ('_index', 'vectors', 'words')

    def __init__(self, words: typing.Sequence[str], vectors: np.ndarray):
        vectors = np.array(vectors, dtype=np.float64)
        if vectors.ndim != 2 or vectors.shape[0] != len(words):
            raise exceptions.DimensionMismatch(
                len(words), vectors.shape[0] if vectors.ndim else 0)
        if vectors.shape[1] < 1:
            raise exceptions.EmbeddingError('Vectors have no components')
        if not np.all(np.isfinite(vectors)):
            raise exceptions.EmbeddingError('Vectors must be finite')
        vectors.setflags(write=False)
        self.words = tuple(words)
        self.vectors = vectors
        self._index = {word: row for row, word in enumerate(self.words)}

    def __len__(self) -> int:
        return len(self.words)

    def __repr__(self) -> str:
        return '{}(words={}, dim={})'.format(
            self.__class__.__name__, len(self), self.dim)

    @property
    def dim(self) -> int:
        """The number of components per vector"""
        return self.vectors.shape[1]

    def row(self, word: str) -> np.ndarray:
        """Return the vector for ``word``"""
        try:
            return self.vectors[self._index[word]]
        except KeyError:
            raise exceptions.UnknownWord(word)

    def aligned(self, words: typing.Sequence[str]) -> 'EmbeddingMatrix':
        """Return the matrix with rows ordered as ``words``

        :raises: logoquant.exceptions.MissingEmbedding

        """
        if tuple(words) == self.words:
            return self
        missing = [word for word in words if word not in self._index]
        if missing:
            raise exceptions.MissingEmbedding(missing)
        return EmbeddingMatrix(
            words, self.vectors[[self._index[word] for word in words]])

    def duplicate_groups(self) -> typing.List[typing.List[str]]:
        """Return the groups of words that share an identical vector"""
        _, inverse, counts = np.unique(
            self.vectors, axis=0, return_inverse=True, return_counts=True)
        inverse = inverse.reshape(-1)
        groups = {}  # type: typing.Dict[int, typing.List[str]]
        for row, group in enumerate(inverse):
            if counts[group] > 1:
                groups.setdefault(int(group), []).append(self.words[row])
        return sorted(groups.values(), key=lambda words: words[0])


def load_embeddings(path: storage.PathLike,
                    vocabulary: vocab.Vocabulary,
                    missing: str = MISSING_ERROR,
                    seed: int = 42) \
        -> typing.Tuple[EmbeddingMatrix, typing.List[str]]:
    """Load vectors for ``vocabulary`` from a GloVe style text file

    Each line holds a word followed by its components. Words that are not
    in the vocabulary are returned separately, in file order.

    :param path: The embedding file, gzip compressed when ending in ``.gz``
    :param vocabulary: The words that need a vector
    :param missing: ``error`` to fail on vocabulary words absent from the
        file, ``synthesize`` to give them synthetic vectors
    :param seed: Seed for synthesized fallback vectors
    :raises: logoquant.exceptions.EmbeddingError

    """
    if missing not in (MISSING_ERROR, MISSING_SYNTHESIZE):
        raise exceptions.ConfigurationError(
            'Invalid missing-word policy: {!r}'.format(missing))
    found = {}  # type: typing.Dict[str, np.ndarray]
    out_of_vocabulary, dim = [], None
    with storage.open_text(path) as handle:
        for number, line in enumerate(handle, 1):
            fields = line.split()
            if not fields:
                continue
            word, values = fields[0], fields[1:]
            if dim is None:
                dim = len(values)
                if dim < 1:
                    raise exceptions.DimensionMismatch(1, 0, number)
            elif len(values) != dim:
                raise exceptions.DimensionMismatch(dim, len(values), number)
            vector = np.array([_parse_component(value, number)
                               for value in values])
            if word not in vocabulary:
                out_of_vocabulary.append(word)
            elif word in found:
                LOGGER.warning('Ignoring repeated vector for %r on line %i',
                               word, number)
            else:
                found[word] = vector
    if dim is None:
        raise exceptions.EmbeddingError('No vectors in {}'.format(path))

    absent = [word for word in vocabulary if word not in found]
    if absent and missing == MISSING_ERROR:
        raise exceptions.MissingEmbedding(absent)
    if absent:
        LOGGER.warning('Synthesizing vectors for %i words missing from %s',
                       len(absent), path)
        synthetic = synthesize_embeddings(vocabulary, dim, seed)
        for word in absent:
            found[word] = synthetic.row(word)
    LOGGER.info('Loaded %i vectors of dimension %i (%i out of vocabulary)',
                len(found), dim, len(out_of_vocabulary))
    return (EmbeddingMatrix(vocabulary.words,
                            np.stack([found[word] for word in vocabulary])),
            out_of_vocabulary)


def save_embeddings(matrix: EmbeddingMatrix,
                    path: storage.PathLike) -> None:
    """Write ``matrix`` in the GloVe text format

    Components are written with :func:`repr` so reloading reproduces them
    exactly.

    """
    with storage.atomic_write(path) as handle:
        for word, vector in zip(matrix.words, matrix.vectors):
            handle.write(' '.join([word] + [repr(float(value))
                                            for value in vector]) + '\n')


def synthesize_embeddings(vocabulary: vocab.Vocabulary,
                          dim: int,
                          seed: int) -> EmbeddingMatrix:
    """Generate deterministic vectors from a mixture of Gaussians

    The components sit on a grid with ``r`` levels per dimension, where
    ``r`` is the smallest value with ``r ** dim >= len(vocabulary)``. Levels
    are packed more tightly towards the centre of the grid. Words take
    distinct cells in order of frequency rank, nearest to the centre first
    and in seeded random order among equally distant cells. In every
    subspace the central components therefore carry the most weight and
    hold the frequent words. Each word is drawn around its cell with a
    spread that grows with its rank.

    :param vocabulary: The words to generate vectors for
    :param dim: The number of components per vector
    :param seed: Fully determines the output

    """
    if dim < 1:
        raise exceptions.ConfigurationError('dim must be at least 1')
    size = len(vocabulary)
    levels = max(2, _integer_root(size, dim))
    offsets = np.arange(levels, dtype=np.float64) - (levels - 1) / 2.0
    positions = offsets + 0.5 * offsets * np.abs(offsets)

    noise_rng, cell_rng = [np.random.default_rng(sequence) for sequence
                           in np.random.SeedSequence(seed).spawn(2)]
    noise = noise_rng.standard_normal((size, dim))
    centres = np.empty((size, dim))
    scales = np.empty(size)
    rows = {word: row for row, word in enumerate(vocabulary.words)}
    cells = central_cells(positions, dim, size, cell_rng)
    for rank, (word, cell) in enumerate(zip(vocabulary.ranked(), cells)):
        row = rows[word]
        centres[row] = positions[list(cell)]
        scales[row] = 0.02 + 0.06 * (rank / max(1, size - 1))
    return EmbeddingMatrix(vocabulary.words,
                           centres + noise * scales[:, np.newaxis])


def central_cells(positions: np.ndarray,
                  dim: int,
                  count: int,
                  rng: typing.Optional[np.random.Generator] = None) \
        -> typing.List[typing.Tuple[int, ...]]:
    """Return the ``count`` grid cells nearest to the origin, nearest first

    A cell is a tuple of level indices into ``positions``, one per
    dimension. Cells at equal distance are ordered by draws from ``rng``,
    or by their level indices when no generator is given.

    """
    levels = len(positions)
    if count > levels ** dim:
        raise ValueError('The grid has fewer than {} cells'.format(count))
    costs = np.square(positions)
    order = sorted(range(levels), key=lambda level: (costs[level], level))
    extra = [float(costs[level] - costs[order[0]]) for level in order]

    def entry(state: tuple) -> tuple:
        cost = round(sum(extra[step] for _axis, step in state), 9)
        return cost, float(rng.random()) if rng is not None else 0.0, state

    # A state lists the (axis, step) pairs of axes off their cheapest level
    # and only grows at or after its last axis, so each is pushed once.
    heap = [entry(())]
    cells = []
    while len(cells) < count:
        _cost, _tie, state = heapq.heappop(heap)
        cell = [order[0]] * dim
        for axis, step in state:
            cell[axis] = order[step]
        cells.append(tuple(cell))
        steps = dict(state)
        for axis in range(state[-1][0] if state else 0, dim):
            step = steps.get(axis, 0) + 1
            if step < levels:
                heapq.heappush(heap, entry(
                    tuple(sorted({**steps, axis: step}.items()))))
    return cells


def _integer_root(value: int, degree: int) -> int:
    """Return the smallest integer ``r`` with ``r ** degree >= value``"""
    root = max(1, int(round(value ** (1.0 / degree))))
    while root ** degree < value:
        root += 1
    while root > 1 and (root - 1) ** degree >= value:
        root -= 1
    return root


def _parse_component(value: str, line: int) -> float:
    if not _NUMBER.match(value):
        raise exceptions.MalformedVector(value, line)
    return float(value)
