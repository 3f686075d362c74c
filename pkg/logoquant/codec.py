"""
Abstract Subword Codec
======================

Converts between words and prefixed code symbols. Infrequent words of a
corpus are replaced by the ``m`` symbols of their code tuple, and symbol
streams are decoded back to words, falling back to a nearest neighbor
search when a tuple does not belong to any word.

"""
import collections
import dataclasses
import enum
import logging
import re
import typing

import numpy as np

from logoquant import (config, embedding, escape, exceptions, pq, storage,
                       transcoders, vocab)

LOGGER = logging.getLogger(__name__)

DEFAULT_PREFIXES = escape.PREFIX_ALPHABET
EXTENSION = '.lqc.json'
FORMAT_VERSION = pq.FORMAT_VERSION
UNKNOWN = '⟨UNK⟩'

_PAYLOAD = re.compile(r'^[0-9]+$')


class DecodeStatus(enum.Enum):
    """How a decoded word was obtained"""
    PASSTHROUGH = 'passthrough'
    EXACT = 'exact'
    RECOVERED = 'recovered'
    ERROR = 'error'


@dataclasses.dataclass(frozen=True)
class DecodedToken:
    word: str
    status: DecodeStatus


@dataclasses.dataclass
class DecodeReport:
    """Counts of decoded tokens by :class:`DecodeStatus`"""
    passthrough: int = 0
    exact: int = 0
    recovered: int = 0
    errors: int = 0

    def add(self, tokens: typing.Iterable[DecodedToken]) -> None:
        for token in tokens:
            name = 'errors' if token.status is DecodeStatus.ERROR \
                else token.status.value
            setattr(self, name, getattr(self, name) + 1)

    @property
    def all_exact(self) -> bool:
        """:data:`True` when nothing had to be recovered or replaced"""
        return not self.recovered and not self.errors

    def summary(self) -> str:
        if self.all_exact:
            return 'exact: all ({} symbol groups, {} raw tokens)'.format(
                self.exact, self.passthrough)
        return 'exact: {}, recovered: {}, errors: {}, raw: {}'.format(
            self.exact, self.recovered, self.errors, self.passthrough)


@dataclasses.dataclass(frozen=True)
class EncodedCorpus:
    """Encoded sentences and the checksum of the table that encoded them"""
    lines: typing.Tuple[str, ...]
    table_checksum: str

    @property
    def header(self) -> str:
        return '{} {}'.format(escape.HEADER_TAG, self.table_checksum)

    def text_lines(self, header: bool = False) -> typing.List[str]:
        """Return the lines to write, optionally led by the header"""
        return ([self.header] if header else []) + list(self.lines)


class SymbolTable:
    """The bijection between words and their code symbol sequences

    Every vocabulary word has a code tuple, regardless of its frequency.
    Only tuples with exactly one preimage map back to a word.

    :param prefixes: One prefix character per subspace
    :param vocabulary: The frequency snapshot the table was built from
    :param word_to_tuple: The code tuple of every vocabulary word
    :param codebook_checksum: Checksum of the generating codebook

    """

    def __init__(self,
                 prefixes: str,
                 vocabulary: vocab.Vocabulary,
                 word_to_tuple: typing.Mapping[str, typing.Sequence[int]],
                 codebook_checksum: str):
        _validate_prefixes(prefixes)
        missing = [word for word in vocabulary if word not in word_to_tuple]
        if missing:
            raise exceptions.MissingEmbedding(missing)
        self.prefixes = prefixes
        self.vocabulary = vocabulary
        self.word_to_tuple = {
            word: tuple(int(index) for index in word_to_tuple[word])
            for word in vocabulary}
        for code in self.word_to_tuple.values():
            if len(code) != len(prefixes):
                raise exceptions.CorruptFile(
                    'Code {!r} does not have {} indices'.format(
                        code, len(prefixes)))
        preimages = collections.Counter(self.word_to_tuple.values())
        self.tuple_to_word = {code: word for word, code
                              in self.word_to_tuple.items()
                              if preimages[code] == 1}
        self.codebook_checksum = codebook_checksum

    def __len__(self) -> int:
        return len(self.word_to_tuple)

    def __repr__(self) -> str:
        return '{}(m={}, words={}, unique={})'.format(
            self.__class__.__name__, self.m, len(self),
            len(self.tuple_to_word))

    @property
    def m(self) -> int:
        return len(self.prefixes)

    @property
    def injective(self) -> bool:
        """:data:`True` when every word has its own code tuple"""
        return len(self.tuple_to_word) == len(self.word_to_tuple)

    def checksum(self) -> str:
        """Return the SHA-256 digest of the table contents"""
        return storage.bytes_checksum(transcoders.canonical({
            'prefixes': self.prefixes,
            'codebook': self.codebook_checksum,
            'words': [[word, list(code), self.vocabulary.count(word)]
                      for word, code in self.word_to_tuple.items()]
        }))

    def symbols(self, word: str) -> typing.List[str]:
        """Return the code symbols of ``word``"""
        try:
            return format_symbols(self.word_to_tuple[word], self.prefixes)
        except KeyError:
            raise exceptions.UnknownWord(word)

    def encode_tokens(self, tokens: typing.Sequence[str],
                      f_ct: float) -> typing.List[str]:
        """Replace the infrequent words of a sentence by their symbols

        Frequent words pass through, escaped when they collide with the
        symbol pattern.

        :raises: logoquant.exceptions.MissingEmbedding

        """
        encoded = []
        for token in tokens:
            if token not in self.vocabulary:
                raise exceptions.MissingEmbedding([token])
            if vocab.classify_word(self.vocabulary, token, f_ct) \
                    is vocab.WordClass.FREQUENT:
                encoded.append(escape.escape_token(token))
            else:
                encoded.extend(self.symbols(token))
        return encoded


def format_symbols(code: typing.Sequence[int],
                   prefixes: str = DEFAULT_PREFIXES) -> typing.List[str]:
    """Return the prefixed decimal symbols of a code tuple

    :raises: logoquant.exceptions.ConfigurationError

    """
    if len(prefixes) < len(code):
        raise exceptions.ConfigurationError(
            '{} prefixes can not format {} symbols'.format(
                len(prefixes), len(code)))
    return ['{}{}'.format(prefix, int(index))
            for prefix, index in zip(prefixes, code)]


def parse_symbols(tokens: typing.Sequence[str],
                  prefixes: str,
                  ks: typing.Sequence[int]) -> pq.CodeTuple:
    """Parse exactly ``m`` symbols in prefix order into a code tuple

    :raises: logoquant.exceptions.SymbolError
    :raises: logoquant.exceptions.ConfigurationError

    """
    if len(prefixes) < len(ks):
        raise exceptions.ConfigurationError(
            '{} prefixes can not parse {} symbols'.format(
                len(prefixes), len(ks)))
    return tuple(_parse_group(tokens, prefixes[:len(ks)], ks))


def build_symbol_table(vocabulary: vocab.Vocabulary,
                       codebook: pq.Codebook,
                       matrix: embedding.EmbeddingMatrix,
                       prefixes: typing.Optional[str] = None) -> SymbolTable:
    """Quantize every vocabulary word into a :class:`SymbolTable`

    :raises: logoquant.exceptions.MissingEmbedding

    """
    prefixes = prefixes or DEFAULT_PREFIXES[:codebook.m]
    if len(prefixes) != codebook.m:
        raise exceptions.ConfigurationError(
            'Expected {} prefixes, received {}'.format(
                codebook.m, len(prefixes)))
    aligned = matrix.aligned(vocabulary.words)
    codes = pq.quantize_all(codebook, aligned)
    table = SymbolTable(
        prefixes, vocabulary,
        {word: code for word, code in zip(vocabulary.words, codes.tolist())},
        codebook.checksum())
    LOGGER.info('Built symbol table for %i words, %i unique tuples',
                len(table), len(table.tuple_to_word))
    return table


def encode_lines(lines: typing.Iterable[str],
                 table: SymbolTable,
                 f_ct: float) -> EncodedCorpus:
    """Encode sentences with an existing symbol table"""
    encoded = tuple(' '.join(table.encode_tokens(vocab.tokenize(line), f_ct))
                    for line in lines)
    return EncodedCorpus(encoded, table.checksum())


def encode_corpus(lines: typing.Sequence[str],
                  vocabulary: vocab.Vocabulary,
                  codebook: pq.Codebook,
                  matrix: embedding.EmbeddingMatrix,
                  f_ct: float) -> typing.Tuple[EncodedCorpus, SymbolTable]:
    """Decompose the infrequent words of a corpus into code symbols

    :param lines: One sentence per item
    :param vocabulary: The frequency snapshot used for classification
    :param codebook: The trained codebook
    :param matrix: Embeddings of every vocabulary word
    :param f_ct: Words with a frequency of at most ``f_ct`` are decomposed
    :raises: logoquant.exceptions.MissingEmbedding

    """
    table = build_symbol_table(vocabulary, codebook, matrix)
    return encode_lines(lines, table, f_ct), table


class Decoder:
    """Decodes symbol streams with nearest neighbor recovery

    :param table: The symbol table
    :param codebook: The codebook that generated ``table``
    :param matrix: Embeddings, required for the embedding search space
    :param search: Where to look for the nearest word
    :raises: logoquant.exceptions.ChecksumMismatch

    """

    def __init__(self,
                 table: SymbolTable,
                 codebook: pq.Codebook,
                 matrix: typing.Optional[embedding.EmbeddingMatrix] = None,
                 search: config.SearchSpace = config.SearchSpace.CODEWORD):
        if table.codebook_checksum != codebook.checksum():
            raise exceptions.ChecksumMismatch(
                'The symbol table was not built from this codebook')
        self.table = table
        self.codebook = codebook
        self.ks = codebook.ks
        self.words = table.vocabulary.words
        codes = np.array([table.word_to_tuple[word] for word in self.words],
                         dtype=np.int64)
        if search is config.SearchSpace.CODEWORD:
            self.reference = pq.reconstruct_all(codebook, codes)
        elif matrix is None:
            raise exceptions.ConfigurationError(
                'The embedding search space needs the embeddings')
        else:
            self.reference = matrix.aligned(self.words).vectors
        order = sorted(range(len(self.words)), key=lambda row: (
            -table.vocabulary.count(self.words[row]), self.words[row]))
        self.priority = np.empty(len(order), dtype=np.int64)
        self.priority[order] = np.arange(len(order))

    def decode(self, tokens: typing.Sequence[str],
               lenient: bool = False) -> typing.List[DecodedToken]:
        """Decode a token stream left to right

        :param tokens: Raw, escaped and symbol tokens
        :param lenient: Replace malformed groups by :data:`UNKNOWN`
        :raises: logoquant.exceptions.SymbolError

        """
        decoded, position, m = [], 0, self.table.m
        while position < len(tokens):
            token = tokens[position]
            if not escape.is_symbol(token):
                decoded.append(DecodedToken(escape.unescape_token(token),
                                            DecodeStatus.PASSTHROUGH))
                position += 1
                continue
            end = position
            while end < len(tokens) and end - position < m \
                    and escape.is_symbol(tokens[end]):
                end += 1
            try:
                if end - position < m:
                    raise exceptions.PartialGroup(
                        'Incomplete symbol group', end - 1)
                indices = _parse_group(tokens[position:end],
                                       self.table.prefixes, self.ks,
                                       offset=position, erase=True)
            except exceptions.SymbolError as error:
                if not lenient:
                    raise
                LOGGER.warning('Replacing malformed symbol group: %s', error)
                decoded.append(DecodedToken(UNKNOWN, DecodeStatus.ERROR))
            else:
                decoded.append(self.resolve(indices))
            position = end
        return decoded

    def resolve(self, indices: typing.Sequence[typing.Optional[int]]) \
            -> DecodedToken:
        """Map code indices to a word

        ``None`` marks an erased subspace whose index was out of range; it
        is left out of the distance.

        """
        if None not in indices:
            word = self.table.tuple_to_word.get(tuple(indices))
            if word is not None:
                return DecodedToken(word, DecodeStatus.EXACT)
        return DecodedToken(self.words[self.nearest(indices)],
                            DecodeStatus.RECOVERED)

    def nearest(self, indices: typing.Sequence[typing.Optional[int]]) -> int:
        """Return the row of the word nearest to the given code indices

        Ties go to the more frequent word, then to the lexicographically
        smaller one.

        """
        partition = self.codebook.partition
        query = np.zeros(partition.dim)
        kept = []
        for subspace, index in enumerate(indices):
            if index is None:
                continue
            start, stop = partition.bounds(subspace)
            query[start:stop] = self.codebook.sub_codebooks[subspace][index]
            kept.extend(range(start, stop))
        if len(kept) == partition.dim:
            distances = ((self.reference - query) ** 2).sum(axis=1)
        else:
            distances = ((self.reference[:, kept] - query[kept])
                         ** 2).sum(axis=1)
        candidates = np.flatnonzero(distances == distances.min())
        return int(candidates[np.argmin(self.priority[candidates])])


def decode_tokens(tokens: typing.Sequence[str],
                  table: SymbolTable,
                  codebook: pq.Codebook,
                  matrix: typing.Optional[embedding.EmbeddingMatrix] = None,
                  search: config.SearchSpace = config.SearchSpace.CODEWORD,
                  lenient: bool = False) -> typing.List[DecodedToken]:
    """Decode one token stream, see :meth:`Decoder.decode`"""
    return Decoder(table, codebook, matrix, search).decode(tokens, lenient)


def decode_corpus(lines: typing.Sequence[str],
                  table: SymbolTable,
                  codebook: pq.Codebook,
                  matrix: typing.Optional[embedding.EmbeddingMatrix] = None,
                  search: config.SearchSpace = config.SearchSpace.CODEWORD,
                  lenient: bool = False) \
        -> typing.Tuple[typing.List[str], DecodeReport]:
    """Decode an encoded corpus

    A first line holding the ``#lqc`` header is verified against the
    table checksum and dropped.

    :raises: logoquant.exceptions.ChecksumMismatch
    :raises: logoquant.exceptions.SymbolError

    """
    lines = list(lines)
    if lines and vocab.tokenize(lines[0])[:1] == [escape.HEADER_TAG]:
        fields = vocab.tokenize(lines.pop(0))
        if len(fields) != 2 or fields[1] != table.checksum():
            raise exceptions.ChecksumMismatch(
                'Encoded corpus header does not match the symbol table')
    decoder = Decoder(table, codebook, matrix, search)
    report, decoded = DecodeReport(), []
    for number, line in enumerate(lines, 1):
        try:
            tokens = decoder.decode(vocab.tokenize(line), lenient)
        except exceptions.SymbolError as error:
            error.line = number
            raise
        report.add(tokens)
        decoded.append(' '.join(token.word for token in tokens))
    LOGGER.info('Decoded %i lines: %s', len(decoded), report.summary())
    return decoded, report


def encoded_dictionary(lines: typing.Iterable[str]) -> typing.Dict[str, int]:
    """Return the token counts of an encoded corpus, most frequent first"""
    counts = collections.Counter()  # type: typing.Counter[str]
    for line in lines:
        counts.update(vocab.tokenize(line))
    return dict(sorted(counts.items(), key=lambda item: (-item[1], item[0])))


def save_codebook(codebook: pq.Codebook,
                  table: SymbolTable,
                  path: storage.PathLike) -> str:
    """Persist a codebook and its symbol table as a versioned document

    Centroids are stored as :func:`repr` strings so that loading restores
    them bit for bit. Returns the document checksum.

    :raises: logoquant.exceptions.ChecksumMismatch

    """
    if table.codebook_checksum != codebook.checksum():
        raise exceptions.ChecksumMismatch(
            'The symbol table was not built from this codebook')
    document = {
        'version': FORMAT_VERSION,
        'm': codebook.m,
        'sub_dim': codebook.partition.sub_dim,
        'prefixes': table.prefixes,
        'ks': codebook.ks,
        'centroids': [[[repr(float(value)) for value in row]
                       for row in centroids]
                      for centroids in codebook.sub_codebooks],
        'config': codebook.training_config,
        'word_to_tuple': {word: list(code)
                          for word, code in table.word_to_tuple.items()},
        'counts': table.vocabulary.counts()
    }
    document['checksum'] = storage.bytes_checksum(
        transcoders.canonical(document))
    with storage.atomic_write(path, binary=True) as handle:
        handle.write(transcoders.JSON().to_bytes(document))
    LOGGER.info('Saved codebook %s to %s', document['checksum'][:12], path)
    return document['checksum']


def load_codebook(path: storage.PathLike) \
        -> typing.Tuple[pq.Codebook, SymbolTable]:
    """Load a document written by :func:`save_codebook`

    The checksum covers the document content and the file must hold exactly
    the bytes :func:`save_codebook` writes for that content, so neither
    edited values nor edited whitespace load silently.

    :raises: logoquant.exceptions.IntegrityError

    """
    transcoder = transcoders.JSON()
    with open(path, 'rb') as handle:
        data = handle.read()
    document = transcoder.from_bytes(data)
    if not isinstance(document, dict) or 'version' not in document:
        raise exceptions.CorruptFile('{} is not a codebook'.format(path))
    if document['version'] != FORMAT_VERSION:
        raise exceptions.UnsupportedVersion(
            'Unsupported codebook version {!r}'.format(document['version']))
    try:
        canonical_bytes = transcoder.to_bytes(document)
    except (TypeError, ValueError) as error:
        raise exceptions.CorruptFile(
            'Invalid codebook document {}: {}'.format(path, error))
    if canonical_bytes != data:
        raise exceptions.ChecksumMismatch(
            '{} differs from its canonical serialization'.format(path))
    recorded = document.pop('checksum', None)
    if recorded != storage.bytes_checksum(transcoders.canonical(document)):
        raise exceptions.ChecksumMismatch(
            'Checksum mismatch in {}'.format(path))
    try:
        partition = pq.SubspacePartition(document['m'], document['sub_dim'])
        codebook = pq.Codebook(
            partition,
            [np.array([[float(value) for value in row] for row in centroids],
                      dtype=np.float64)
             for centroids in document['centroids']],
            document['config'], document['version'])
        if codebook.ks != document['ks']:
            raise exceptions.CorruptFile('Cluster counts do not match')
        table = SymbolTable(document['prefixes'],
                            vocab.Vocabulary(document['counts']),
                            document['word_to_tuple'],
                            codebook.checksum())
    except (KeyError, TypeError, ValueError,
            exceptions.QuantizerError, exceptions.EmbeddingError) as error:
        raise exceptions.CorruptFile(
            'Invalid codebook document {}: {}'.format(path, error))
    LOGGER.debug('Loaded %r and %r from %s', codebook, table, path)
    return codebook, table


def _parse_group(tokens: typing.Sequence[str],
                 prefixes: str,
                 ks: typing.Sequence[int],
                 offset: int = 0,
                 erase: bool = False) -> typing.List[typing.Optional[int]]:
    """Parse a symbol group, optionally erasing out of range indices"""
    m = len(ks)
    if len(tokens) != m:
        raise exceptions.WrongArity(
            'Expected {} symbols, received {}'.format(m, len(tokens)),
            offset + min(len(tokens), m))
    indices = []  # type: typing.List[typing.Optional[int]]
    for position, (token, prefix, limit) in enumerate(
            zip(tokens, prefixes, ks), offset):
        if not token.startswith(prefix):
            raise exceptions.WrongPrefixOrder(
                'Expected prefix {!r} in {!r}'.format(prefix, token),
                position)
        payload = token[len(prefix):]
        if not _PAYLOAD.match(payload):
            raise exceptions.NonNumericPayload(
                'Invalid payload {!r}'.format(payload), position)
        index = int(payload)
        if index >= limit:
            if not erase:
                raise exceptions.OutOfRangeIndex(position, index, limit)
            LOGGER.debug('Erasing out of range index %i at %i',
                         index, position)
            indices.append(None)
        else:
            indices.append(index)
    return indices


def _validate_prefixes(prefixes: str) -> None:
    if not 1 <= len(prefixes) <= len(DEFAULT_PREFIXES):
        raise exceptions.ConfigurationError(
            'Between 1 and {} subspaces are supported, received {}'.format(
                len(DEFAULT_PREFIXES), len(prefixes)))
    if len(set(prefixes)) != len(prefixes) \
            or not set(prefixes) <= set(DEFAULT_PREFIXES):
        raise exceptions.ConfigurationError(
            'Invalid prefixes {!r}'.format(prefixes))
