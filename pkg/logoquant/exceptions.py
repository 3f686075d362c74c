"""Logoquant Exceptions"""
import typing


class LogoquantException(Exception):
    """Base exception for all Logoquant exceptions

    The :attr:`exit_code` is the process exit status the command line
    interface returns when the exception is not handled.

    """
    exit_code = 1


class ConfigurationError(LogoquantException):
    """Raised when a hyperparameter or option is out of its valid range"""


class EmptyCorpus(LogoquantException):
    """Raised when a corpus does not contain a single token"""


class UnknownWord(LogoquantException, KeyError):
    """Raised when looking up a word that is not in the vocabulary

    :param word: The word that was not found

    """
    def __init__(self, word: str):
        super(UnknownWord, self).__init__(word)
        self.word = word

    def __str__(self) -> str:
        return 'Unknown word: {!r}'.format(self.word)


class EmbeddingError(LogoquantException):
    """Base exception for embedding ingestion errors"""


class DimensionMismatch(EmbeddingError):
    """Raised when vectors do not share one dimensionality

    :param expected: The expected number of components
    :param received: The number of components that was found
    :param line: The 1-based line number in the source file, if any

    """
    def __init__(self,
                 expected: int,
                 received: int,
                 line: typing.Optional[int] = None):
        super(DimensionMismatch, self).__init__(
            'Expected {} components, received {}{}'.format(
                expected, received,
                ' on line {}'.format(line) if line is not None else ''))
        self.expected = expected
        self.received = received
        self.line = line


class MalformedVector(EmbeddingError):
    """Raised when a vector component can not be parsed as a finite number"""
    def __init__(self, value: str, line: int):
        super(MalformedVector, self).__init__(
            'Invalid component {!r} on line {}'.format(value, line))
        self.value = value
        self.line = line


class MissingEmbedding(EmbeddingError):
    """Raised when vocabulary words have no vector

    :param words: The words that are missing

    """
    def __init__(self, words: typing.Sequence[str]):
        shown = ', '.join(repr(word) for word in list(words)[:10])
        if len(words) > 10:
            shown += ', ... ({} total)'.format(len(words))
        super(MissingEmbedding, self).__init__(
            'No embedding for {}'.format(shown))
        self.words = list(words)


class QuantizerError(LogoquantException):
    """Base exception for product quantization errors"""


class PartitionError(QuantizerError):
    """Raised when vectors can not be evenly divided into subspaces"""


class DegenerateBandwidth(QuantizerError):
    """Raised when an automatic KDE bandwidth collapses to zero"""


class TooManyClusters(QuantizerError):
    """Raised when more centroids are requested than distinct points exist

    :param requested: The number of centroids requested
    :param available: The number of distinct points

    """
    def __init__(self, requested: int, available: int):
        super(TooManyClusters, self).__init__(
            'Requested {} centroids from {} distinct points'.format(
                requested, available))
        self.requested = requested
        self.available = available


class UnreachableTarget(LogoquantException):
    """Raised when the degree of distinctness target can not be met

    Every subspace reached its number of distinct subvectors, which only
    happens when words share an identical embedding.

    :param target: The requested degree of distinctness
    :param achieved: The best degree of distinctness reached
    :param duplicates: Groups of words sharing one embedding row

    """
    exit_code = 2

    def __init__(self,
                 target: float,
                 achieved: float,
                 duplicates: typing.Sequence[typing.Sequence[str]]):
        groups = '; '.join(' '.join(group) for group in duplicates[:5])
        super(UnreachableTarget, self).__init__(
            'DoD target {} unreachable (best {:.6f}); duplicate embeddings: '
            '{}'.format(target, achieved, groups or 'none'))
        self.target = target
        self.achieved = achieved
        self.duplicates = [list(group) for group in duplicates]


class SearchExhausted(LogoquantException):
    """Raised when the cluster count search runs out of rounds"""
    exit_code = 2


class SymbolError(LogoquantException):
    """Base exception for malformed symbol groups

    :param message: The error description
    :param position: The 0-based token position of the violation

    """
    def __init__(self, message: str, position: int):
        super(SymbolError, self).__init__(
            '{} at position {}'.format(message, position))
        self.position = position


class WrongArity(SymbolError):
    """Raised when a symbol group does not hold exactly m symbols"""


class WrongPrefixOrder(SymbolError):
    """Raised when a symbol carries another subspace's prefix"""


class NonNumericPayload(SymbolError):
    """Raised when a symbol's payload is not a decimal index"""


class OutOfRangeIndex(SymbolError):
    """Raised when a symbol's index is not below its sub-codebook size"""
    def __init__(self, position: int, index: int, limit: int):
        super(OutOfRangeIndex, self).__init__(
            'Index {} is not below {}'.format(index, limit), position)
        self.index = index
        self.limit = limit


class PartialGroup(SymbolError):
    """Raised when a symbol group is cut short in a token stream"""


class IntegrityError(LogoquantException):
    """Base exception for persisted file integrity failures"""
    exit_code = 3


class ChecksumMismatch(IntegrityError):
    """Raised when content does not match its recorded checksum"""


class UnsupportedVersion(IntegrityError):
    """Raised when a codebook file carries an unknown format version"""


class CorruptFile(IntegrityError):
    """Raised when a codebook file is truncated or not a valid document"""
