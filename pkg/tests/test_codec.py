import json
import math
import os
import pathlib
import tempfile
import unittest

import numpy as np

from logoquant import (codec, config, dod, embedding, exceptions, pq,
                       vocab)
from tests import fixtures


def nearest_word(model: fixtures.Model,
                 code: tuple,
                 erased: tuple = ()) -> str:
    """Exhaustive nearest codeword scan over the vocabulary"""
    words = model.vocabulary.words
    codes = np.array([model.table.word_to_tuple[word] for word in words])
    reference = pq.reconstruct_all(model.codebook, codes)
    query = pq.reconstruct(model.codebook, [
        0 if index in erased else value for index, value in enumerate(code)])
    columns = [column for index in range(model.codebook.m)
               if index not in erased
               for column in range(*model.codebook.partition.bounds(index))]
    distances = ((reference[:, columns] - query[columns]) ** 2).sum(axis=1)
    best = distances.min()
    return min((word for word, distance in zip(words, distances)
                if distance == best),
               key=lambda word: (-model.vocabulary.count(word), word))


class SymbolFormatTests(unittest.TestCase):

    def test_format_symbols(self):
        self.assertEqual(codec.format_symbols((25, 814, 3)),
                         ['@25', '$814', '&3'])

    def test_that_too_few_prefixes_raise(self):
        with self.assertRaises(exceptions.ConfigurationError):
            codec.format_symbols((1, 2, 3), '@$')

    def test_parse_symbols(self):
        self.assertEqual(
            codec.parse_symbols(['@25', '$814', '&3'], '@$&', [30, 900, 4]),
            (25, 814, 3))

    def test_that_wrong_arity_raises(self):
        with self.assertRaises(exceptions.WrongArity) as context:
            codec.parse_symbols(['@25', '$814'], '@$&', [30, 900, 4])
        self.assertEqual(context.exception.position, 2)

    def test_that_wrong_prefix_order_raises(self):
        with self.assertRaises(exceptions.WrongPrefixOrder) as context:
            codec.parse_symbols(['@1', '&2', '$3'], '@$&', [5, 5, 5])
        self.assertEqual(context.exception.position, 1)

    def test_that_non_numeric_payloads_raise(self):
        for token in ('$x', '$-1', '$', '$1.5'):
            with self.assertRaises(exceptions.NonNumericPayload) as context:
                codec.parse_symbols(['@1', token, '&3'], '@$&', [5, 5, 5])
            self.assertEqual(context.exception.position, 1)

    def test_that_out_of_range_indices_raise(self):
        with self.assertRaises(exceptions.OutOfRangeIndex) as context:
            codec.parse_symbols(['@1', '$2', '&5'], '@$&', [5, 5, 5])
        self.assertEqual(context.exception.position, 2)
        self.assertEqual(context.exception.index, 5)
        self.assertEqual(context.exception.limit, 5)

    def test_that_errors_are_symbol_errors(self):
        with self.assertRaises(exceptions.SymbolError):
            codec.parse_symbols(['x', '$2', '&3'], '@$&', [5, 5, 5])

    def test_that_too_few_prefixes_for_the_cluster_counts_raise(self):
        with self.assertRaises(exceptions.ConfigurationError):
            codec.parse_symbols(['@1', '$2', '&3'], '@$', [5, 5, 5])


class SymbolTableTests(unittest.TestCase):

    def setUp(self):
        super(SymbolTableTests, self).setUp()
        self.model = fixtures.fitted_model()

    def test_that_the_table_is_injective(self):
        self.assertTrue(self.model.table.injective)
        self.assertEqual(len(self.model.table), 300)
        self.assertEqual(self.model.table.prefixes, '@$&')

    def test_that_tuples_match_the_quantizer(self):
        for word in ('w0', 'w17', 'w299'):
            self.assertEqual(
                self.model.table.word_to_tuple[word],
                pq.quantize(self.model.codebook, self.model.matrix.row(word)))

    def test_zero_cutoff_keeps_tokens(self):
        tokens = ['w3', 'w4', 'w250']
        self.assertEqual(self.model.table.encode_tokens(tokens, 0.0), tokens)

    def test_infinite_cutoff_decomposes_tokens(self):
        encoded = self.model.table.encode_tokens(['w3', 'w4'], math.inf)
        self.assertEqual(encoded,
                         self.model.table.symbols('w3')
                         + self.model.table.symbols('w4'))
        self.assertEqual(len(encoded), 6)

    def test_that_unknown_words_raise(self):
        with self.assertRaises(exceptions.MissingEmbedding):
            self.model.table.encode_tokens(['w3', 'bird'], 0.0)
        with self.assertRaises(exceptions.UnknownWord):
            self.model.table.symbols('bird')

    def test_that_more_than_eight_subspaces_are_rejected(self):
        vocabulary = vocab.Vocabulary({'a': 1})
        with self.assertRaises(exceptions.ConfigurationError):
            codec.SymbolTable('@$&#%=+~@', vocabulary, {'a': [0] * 9}, '')

    def test_that_duplicate_prefixes_are_rejected(self):
        vocabulary = vocab.Vocabulary({'a': 1})
        with self.assertRaises(exceptions.ConfigurationError):
            codec.SymbolTable('@@', vocabulary, {'a': [0, 0]}, '')

    def test_that_shared_tuples_have_no_preimage(self):
        vocabulary = vocab.Vocabulary({'a': 1, 'b': 1, 'c': 1})
        table = codec.SymbolTable('@$', vocabulary, {
            'a': [0, 1], 'b': [0, 1], 'c': [1, 1]}, '')
        self.assertEqual(table.tuple_to_word, {(1, 1): 'c'})
        self.assertFalse(table.injective)

    def test_that_distinct_tuples_share_symbols(self):
        codes = [self.model.table.word_to_tuple[word]
                 for word in self.model.vocabulary]
        self.assertEqual(len(set(codes)), len(codes))
        for index in range(self.model.codebook.m):
            column = {code[index] for code in codes}
            self.assertLess(len(column), len(codes))
        first, second = next(
            (first, second)
            for position, first in enumerate(codes)
            for second in codes[position + 1:]
            if first[0] == second[0])
        self.assertNotEqual(first, second)
        self.assertEqual(self.model.table.symbols(
            self.model.table.tuple_to_word[first])[0],
            self.model.table.symbols(
                self.model.table.tuple_to_word[second])[0])

    def test_that_the_checksum_tracks_contents(self):
        other = codec.SymbolTable(
            self.model.table.prefixes,
            vocab.Vocabulary(dict(self.model.vocabulary.counts(), w0=1)),
            self.model.table.word_to_tuple,
            self.model.table.codebook_checksum)
        self.assertNotEqual(self.model.table.checksum(), other.checksum())


class RoundTripTests(unittest.TestCase):

    def setUp(self):
        super(RoundTripTests, self).setUp()
        self.model = fixtures.fitted_model()

    def test_round_trip_is_exact(self):
        median = fixtures.median_frequency(self.model.vocabulary)
        for f_ct in (0.0, median, math.inf):
            encoded, table = codec.encode_corpus(
                self.model.lines, self.model.vocabulary, self.model.codebook,
                self.model.matrix, f_ct)
            decoded, report = codec.decode_corpus(encoded.lines, table,
                                                  self.model.codebook)
            self.assertEqual(decoded, self.model.lines)
            self.assertTrue(report.all_exact)
            self.assertEqual(report.errors, 0)

    def test_zero_cutoff_leaves_the_corpus_unchanged(self):
        encoded = codec.encode_lines(self.model.lines, self.model.table, 0.0)
        self.assertEqual(list(encoded.lines), self.model.lines)

    def test_report_counts(self):
        decoded = codec.decode_tokens(['w1', '@0', '$0', '&0', 'w2'],
                                      self.model.table, self.model.codebook)
        report = codec.DecodeReport()
        report.add(decoded)
        self.assertEqual(report.passthrough, 2)
        self.assertEqual(report.exact + report.recovered, 1)

    def test_header_is_verified(self):
        encoded = codec.encode_lines(self.model.lines, self.model.table,
                                     math.inf)
        lines = encoded.text_lines(header=True)
        self.assertEqual(lines[0],
                         '#lqc {}'.format(self.model.table.checksum()))
        decoded, _report = codec.decode_corpus(lines, self.model.table,
                                               self.model.codebook)
        self.assertEqual(decoded, self.model.lines)

    def test_that_a_foreign_header_raises(self):
        encoded = codec.encode_lines(self.model.lines, self.model.table, 0.0)
        lines = ['#lqc {}'.format('0' * 64)] + list(encoded.lines)
        with self.assertRaises(exceptions.ChecksumMismatch):
            codec.decode_corpus(lines, self.model.table, self.model.codebook)

    def test_that_a_foreign_codebook_raises(self):
        other = pq.Codebook(self.model.codebook.partition, [
            centroids + 1.0
            for centroids in self.model.codebook.sub_codebooks])
        with self.assertRaises(exceptions.ChecksumMismatch):
            codec.decode_tokens(['w1'], self.model.table, other)

    def test_encoded_dictionary(self):
        dictionary = codec.encoded_dictionary(['@1 $2 a', 'a @1 $3'])
        self.assertEqual(list(dictionary.items()),
                         [('@1', 2), ('a', 2), ('$2', 1), ('$3', 1)])


class EscapedCorpusTests(unittest.TestCase):

    def setUp(self):
        super(EscapedCorpusTests, self).setUp()
        self.lines = ['the @12 price', '\\n is #lqc', 'the $3 the', '#lqc']
        self.vocabulary = vocab.ingest_corpus(self.lines)
        self.matrix = embedding.synthesize_embeddings(self.vocabulary, 3, 1)
        self.codebook, _report, _trace = dod.fit(
            self.matrix, config.EncoderConfig(threads=1))

    def test_symbol_like_words_survive_a_round_trip(self):
        for f_ct in (0.0, 0.1, math.inf):
            encoded, table = codec.encode_corpus(
                self.lines, self.vocabulary, self.codebook, self.matrix,
                f_ct)
            decoded, report = codec.decode_corpus(encoded.lines, table,
                                                  self.codebook)
            self.assertEqual(decoded, self.lines)
            self.assertTrue(report.all_exact)

    def test_that_frequent_symbol_like_words_are_escaped(self):
        encoded, _table = codec.encode_corpus(
            self.lines, self.vocabulary, self.codebook, self.matrix, 0.0)
        self.assertEqual(encoded.lines[0], 'the \\@12 price')
        self.assertEqual(encoded.lines[1], '\\\\n is \\#lqc')
        self.assertEqual(encoded.lines[3], '\\#lqc')


class MalformedStreamTests(unittest.TestCase):

    def setUp(self):
        super(MalformedStreamTests, self).setUp()
        self.model = fixtures.fitted_model()

    def decode(self, tokens, lenient=False):
        return codec.decode_tokens(tokens, self.model.table,
                                   self.model.codebook, lenient=lenient)

    def test_that_partial_groups_raise(self):
        with self.assertRaises(exceptions.PartialGroup) as context:
            self.decode(['w1', '@2', '$3'])
        self.assertEqual(context.exception.position, 2)

    def test_that_interrupted_groups_raise(self):
        with self.assertRaises(exceptions.PartialGroup) as context:
            self.decode(['@2', 'w1', '$3', '&1'])
        self.assertEqual(context.exception.position, 0)

    def test_that_wrong_prefix_order_raises(self):
        with self.assertRaises(exceptions.WrongPrefixOrder) as context:
            self.decode(['w1', '@2', '&3', '$1'])
        self.assertEqual(context.exception.position, 2)

    def test_that_lenient_decoding_substitutes_unknown(self):
        with self.assertLogs('logoquant.codec', 'WARNING'):
            decoded = self.decode(['w1', '@2', '&3', '$1', 'w2', '@1'],
                                  lenient=True)
        self.assertEqual([token.word for token in decoded],
                         ['w1', codec.UNKNOWN, 'w2', codec.UNKNOWN])
        self.assertEqual([token.status for token in decoded], [
            codec.DecodeStatus.PASSTHROUGH, codec.DecodeStatus.ERROR,
            codec.DecodeStatus.PASSTHROUGH, codec.DecodeStatus.ERROR])

    def test_that_line_numbers_are_attached(self):
        with self.assertRaises(exceptions.SymbolError) as context:
            codec.decode_corpus(['w1', 'w2 @1'], self.model.table,
                                self.model.codebook)
        self.assertEqual(context.exception.line, 2)

    def test_lenient_report(self):
        _decoded, report = codec.decode_corpus(
            ['w1 @1', 'w2'], self.model.table, self.model.codebook,
            lenient=True)
        self.assertEqual(report.errors, 1)
        self.assertFalse(report.all_exact)


class RecoveryTests(unittest.TestCase):

    def setUp(self):
        super(RecoveryTests, self).setUp()
        self.model = fixtures.fitted_model()
        self.decoder = codec.Decoder(self.model.table, self.model.codebook)

    def test_single_symbol_corruption_matches_exhaustive_search(self):
        rng = np.random.default_rng(13)
        words = self.model.vocabulary.words
        ks = self.model.codebook.ks
        for _ in range(500):
            word = words[int(rng.integers(len(words)))]
            code = list(self.model.table.word_to_tuple[word])
            subspace = int(rng.integers(len(code)))
            code[subspace] = int(rng.integers(ks[subspace]))
            symbols = codec.format_symbols(code, self.model.table.prefixes)
            decoded = self.decoder.decode(symbols)
            self.assertEqual(len(decoded), 1)
            self.assertEqual(decoded[0].word,
                             nearest_word(self.model, tuple(code)))
            if tuple(code) in self.model.table.tuple_to_word:
                self.assertIs(decoded[0].status, codec.DecodeStatus.EXACT)
            else:
                self.assertIs(decoded[0].status,
                              codec.DecodeStatus.RECOVERED)

    def test_out_of_range_indices_are_erased(self):
        word = 'w5'
        code = list(self.model.table.word_to_tuple[word])
        symbols = codec.format_symbols(code, self.model.table.prefixes)
        symbols[1] = '$999'
        decoded = self.decoder.decode(symbols)
        self.assertIs(decoded[0].status, codec.DecodeStatus.RECOVERED)
        self.assertEqual(decoded[0].word,
                         nearest_word(self.model, tuple(code), erased=(1, )))

    def test_ties_prefer_frequent_words(self):
        vocabulary = vocab.Vocabulary({'b': 1, 'a': 1, 'c': 5})
        codebook = pq.Codebook(pq.SubspacePartition(1, 1),
                               [[[0.0], [1.0], [2.0], [3.0]]])
        table = codec.SymbolTable('@', vocabulary,
                                  {'a': [0], 'b': [2], 'c': [3]},
                                  codebook.checksum())
        decoded = codec.decode_tokens(['@1'], table, codebook)
        self.assertEqual(decoded[0].word, 'a')
        table = codec.SymbolTable('@', vocabulary,
                                  {'a': [0], 'b': [3], 'c': [2]},
                                  codebook.checksum())
        decoded = codec.decode_tokens(['@1'], table, codebook)
        self.assertEqual(decoded[0].word, 'c')

    def test_embedding_search_space(self):
        decoder = codec.Decoder(self.model.table, self.model.codebook,
                                self.model.matrix,
                                config.SearchSpace.EMBEDDING)
        symbols = self.model.table.symbols('w9')
        self.assertEqual(decoder.decode(symbols)[0].word, 'w9')

    def test_that_embedding_search_needs_embeddings(self):
        with self.assertRaises(exceptions.ConfigurationError):
            codec.Decoder(self.model.table, self.model.codebook, None,
                          config.SearchSpace.EMBEDDING)


class PersistenceTests(unittest.TestCase):

    def setUp(self):
        super(PersistenceTests, self).setUp()
        self.model = fixtures.fitted_model()
        self.directory = tempfile.TemporaryDirectory()
        self.path = pathlib.Path(self.directory.name) / 'model.lqc.json'
        codec.save_codebook(self.model.codebook, self.model.table, self.path)

    def tearDown(self):
        self.directory.cleanup()
        super(PersistenceTests, self).tearDown()

    def test_round_trip_is_bit_exact(self):
        codebook, table = codec.load_codebook(self.path)
        self.assertEqual(codebook, self.model.codebook)
        self.assertEqual(codebook.checksum(), self.model.codebook.checksum())
        for loaded, original in zip(codebook.sub_codebooks,
                                    self.model.codebook.sub_codebooks):
            self.assertEqual(loaded.tobytes(), original.tobytes())
        self.assertEqual(table.word_to_tuple, self.model.table.word_to_tuple)
        self.assertEqual(table.vocabulary, self.model.vocabulary)
        self.assertEqual(table.checksum(), self.model.table.checksum())

    def test_that_resaving_is_byte_identical(self):
        codebook, table = codec.load_codebook(self.path)
        other = pathlib.Path(self.directory.name) / 'again.lqc.json'
        codec.save_codebook(codebook, table, other)
        self.assertEqual(other.read_bytes(), self.path.read_bytes())

    def test_that_no_temporary_files_remain(self):
        self.assertEqual(os.listdir(self.directory.name), ['model.lqc.json'])

    def test_that_a_flipped_digit_raises(self):
        text = self.path.read_text(encoding='utf-8')
        offset = text.index('"centroids"')
        while not text[offset].isdigit() or text[offset] == '9':
            offset += 1
        text = text[:offset] + str(int(text[offset]) + 1) + text[offset + 1:]
        self.path.write_text(text, encoding='utf-8')
        with self.assertRaises(exceptions.ChecksumMismatch) as context:
            codec.load_codebook(self.path)
        self.assertEqual(context.exception.exit_code, 3)

    def test_that_edited_whitespace_raises(self):
        data = self.path.read_bytes()
        newline = data.index(b'\n')
        for edited in (data[:newline + 1] + b' ' + data[newline + 1:],
                       data[:newline + 1] + b'\t' + data[newline + 2:],
                       data[:newline] + b'\r' + data[newline:],
                       data.rstrip(b'\n'),
                       data + b'\n'):
            self.path.write_bytes(edited)
            with self.assertRaises(exceptions.ChecksumMismatch):
                codec.load_codebook(self.path)

    def test_that_every_flipped_byte_raises(self):
        data = self.path.read_bytes()
        step = max(1, len(data) // 97)
        for offset in range(0, len(data), step):
            edited = bytearray(data)
            edited[offset] ^= 0x01
            self.path.write_bytes(bytes(edited))
            with self.assertRaises(exceptions.IntegrityError):
                codec.load_codebook(self.path)

    def test_that_unknown_versions_raise(self):
        document = json.loads(self.path.read_text(encoding='utf-8'))
        document['version'] = 2
        self.path.write_text(json.dumps(document), encoding='utf-8')
        with self.assertRaises(exceptions.UnsupportedVersion):
            codec.load_codebook(self.path)

    def test_that_truncated_files_raise(self):
        data = self.path.read_bytes()
        self.path.write_bytes(data[:len(data) // 2])
        with self.assertRaises(exceptions.CorruptFile):
            codec.load_codebook(self.path)

    def test_that_other_documents_raise(self):
        self.path.write_text('[1, 2, 3]', encoding='utf-8')
        with self.assertRaises(exceptions.CorruptFile):
            codec.load_codebook(self.path)

    def test_that_a_mismatched_table_is_not_saved(self):
        other = pq.Codebook(self.model.codebook.partition, [
            centroids * 2.0
            for centroids in self.model.codebook.sub_codebooks])
        with self.assertRaises(exceptions.ChecksumMismatch):
            codec.save_codebook(other, self.model.table, self.path)
