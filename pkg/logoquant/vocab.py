"""
Corpus Vocabulary
=================

Counts the words of a space separated corpus and classifies them as
frequent or infrequent against a cut-off frequency.

"""
import collections
import dataclasses
import enum
import logging
import math
import typing

from logoquant import exceptions

LOGGER = logging.getLogger(__name__)

SEPARATOR = ' '


class WordClass(enum.Enum):
    """Classification of a word against the cut-off frequency"""
    FREQUENT = 'frequent'
    INFREQUENT = 'infrequent'


class Vocabulary:
    """Words of a corpus with their occurrence counts.

    Word indices are dense, assigned in order of first appearance, and
    therefore deterministic for a given input. Instances are not meant to
    be mutated after construction.

    :param counts: Occurrence counts keyed by word, in index order

    """

    __slots__ = ('_counts', '_index', '_words', 'total_tokens')

    def __init__(self, counts: typing.Mapping[str, int]):
        if not counts:
            raise exceptions.EmptyCorpus('The vocabulary has no words')
        for word, count in counts.items():
            if count < 1:
                raise ValueError(
                    'Count for {!r} must be positive, got {}'.format(
                        word, count))
        self._counts = dict(counts)
        self._words = tuple(self._counts)
        self._index = {word: offset for offset, word in enumerate(self._words)}
        self.total_tokens = sum(self._counts.values())

    def __contains__(self, word: object) -> bool:
        return word in self._counts

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Vocabulary):
            return NotImplemented
        return list(self._counts.items()) == list(other._counts.items())

    def __iter__(self) -> typing.Iterator[str]:
        return iter(self._words)

    def __len__(self) -> int:
        return len(self._words)

    def __repr__(self) -> str:
        return '{}(words={}, total_tokens={})'.format(
            self.__class__.__name__, len(self), self.total_tokens)

    @property
    def words(self) -> typing.Tuple[str, ...]:
        """The words in index order"""
        return self._words

    def count(self, word: str) -> int:
        """Return the number of occurrences of ``word``

        :raises: logoquant.exceptions.UnknownWord

        """
        try:
            return self._counts[word]
        except KeyError:
            raise exceptions.UnknownWord(word)

    def counts(self) -> typing.Dict[str, int]:
        """Return a copy of the counts, in index order"""
        return dict(self._counts)

    def frequency(self, word: str) -> float:
        """Return the relative frequency of ``word`` in the corpus"""
        return self.count(word) / self.total_tokens

    def index(self, word: str) -> int:
        """Return the dense index of ``word``"""
        try:
            return self._index[word]
        except KeyError:
            raise exceptions.UnknownWord(word)

    def ranked(self) -> typing.List[str]:
        """Return the words by descending count, ties by first appearance"""
        return sorted(self._words,
                      key=lambda word: (-self._counts[word],
                                        self._index[word]))

    def total_frequency(self) -> float:
        """Return the sum of every word's frequency, 1 up to rounding"""
        return math.fsum(self.frequency(word) for word in self._words)


@dataclasses.dataclass(frozen=True)
class CorpusStats:
    """Size statistics for a (possibly encoded) corpus"""
    distinct_token_count: int
    avg_sentence_length: float
    sentence_count: int
    token_count: int


def tokenize(line: str) -> typing.List[str]:
    """Split a sentence on single spaces, dropping empty tokens"""
    return [token for token in line.split(SEPARATOR) if token]


def ingest_corpus(lines: typing.Iterable[str]) -> Vocabulary:
    """Count the tokens of a space separated corpus

    :param lines: One sentence per item
    :raises: logoquant.exceptions.EmptyCorpus

    """
    counts = collections.Counter()  # type: typing.Counter[str]
    sentences = 0
    for line in lines:
        tokens = tokenize(line)
        if tokens:
            sentences += 1
            counts.update(tokens)
    if not counts:
        raise exceptions.EmptyCorpus('The corpus contains no tokens')
    vocabulary = Vocabulary(counts)
    LOGGER.info('Ingested %i sentences, %i tokens, %i distinct words',
                sentences, vocabulary.total_tokens, len(vocabulary))
    return vocabulary


def classify_word(vocabulary: Vocabulary, word: str, f_ct: float) \
        -> WordClass:
    """Classify ``word`` against the cut-off frequency ``f_ct``

    A word is frequent only when its frequency is strictly larger than the
    cut-off, so a frequency equal to ``f_ct`` is infrequent.

    :raises: logoquant.exceptions.UnknownWord

    """
    if vocabulary.frequency(word) > f_ct:
        return WordClass.FREQUENT
    return WordClass.INFREQUENT


def partition(vocabulary: Vocabulary, f_ct: float) \
        -> typing.Tuple[typing.List[str], typing.List[str]]:
    """Return the frequent and the infrequent words for ``f_ct``"""
    frequent, infrequent = [], []
    for word in vocabulary:
        if classify_word(vocabulary, word, f_ct) is WordClass.FREQUENT:
            frequent.append(word)
        else:
            infrequent.append(word)
    return frequent, infrequent


def corpus_stats(lines: typing.Iterable[str],
                 table=None,
                 f_ct: float = 0.0) -> CorpusStats:
    """Report the distinct token count and mean sentence length

    When a symbol table is given, each sentence is first encoded with it
    at cut-off frequency ``f_ct``. Blank lines are not sentences.

    :param lines: One sentence per item
    :param table: Optional :class:`logoquant.codec.SymbolTable`
    :param f_ct: The cut-off frequency used with ``table``

    """
    distinct = set()  # type: typing.Set[str]
    sentences = tokens = 0
    for line in lines:
        sentence = tokenize(line)
        if not sentence:
            continue
        if table is not None:
            sentence = table.encode_tokens(sentence, f_ct)
        sentences += 1
        tokens += len(sentence)
        distinct.update(sentence)
    return CorpusStats(distinct_token_count=len(distinct),
                       avg_sentence_length=tokens / sentences
                       if sentences else 0.0,
                       sentence_count=sentences,
                       token_count=tokens)


def filter_by_length(lines: typing.Iterable[str],
                     max_tokens: int) -> typing.List[str]:
    """Drop sentences that hold more than ``max_tokens`` tokens

    This is a dataset preparation step, it is not applied by the encoder.

    """
    kept, dropped = [], 0
    for line in lines:
        if len(tokenize(line)) > max_tokens:
            dropped += 1
        else:
            kept.append(line)
    if dropped:
        LOGGER.warning('Dropped %i sentences longer than %i tokens',
                       dropped, max_tokens)
    return kept
