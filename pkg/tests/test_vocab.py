import math
import unittest

from logoquant import exceptions, vocab
from tests import fixtures


class VocabularyTests(unittest.TestCase):

    def setUp(self):
        super(VocabularyTests, self).setUp()
        self.vocabulary = vocab.ingest_corpus(
            ['the cat sat', 'the dog', '', 'a cat saw the dog'])

    def test_indices_follow_first_appearance(self):
        self.assertEqual(self.vocabulary.words,
                         ('the', 'cat', 'sat', 'dog', 'a', 'saw'))
        self.assertEqual(self.vocabulary.index('dog'), 3)

    def test_counts(self):
        self.assertEqual(self.vocabulary.count('the'), 3)
        self.assertEqual(self.vocabulary.count('saw'), 1)
        self.assertEqual(self.vocabulary.total_tokens, 10)

    def test_frequency(self):
        self.assertEqual(self.vocabulary.frequency('cat'), 0.2)

    def test_frequencies_sum_to_one(self):
        self.assertAlmostEqual(self.vocabulary.total_frequency(), 1.0,
                               delta=1e-12)

    def test_ranked_breaks_ties_by_first_appearance(self):
        self.assertEqual(self.vocabulary.ranked(),
                         ['the', 'cat', 'dog', 'sat', 'a', 'saw'])

    def test_that_unknown_words_raise(self):
        with self.assertRaises(exceptions.UnknownWord) as context:
            self.vocabulary.count('bird')
        self.assertEqual(context.exception.word, 'bird')

    def test_that_unknown_word_is_a_key_error(self):
        with self.assertRaises(KeyError):
            self.vocabulary.frequency('bird')

    def test_membership(self):
        self.assertIn('cat', self.vocabulary)
        self.assertNotIn('bird', self.vocabulary)

    def test_equality(self):
        self.assertEqual(self.vocabulary,
                         vocab.Vocabulary(self.vocabulary.counts()))

    def test_that_non_positive_counts_are_rejected(self):
        with self.assertRaises(ValueError):
            vocab.Vocabulary({'a': 0})


class IngestTests(unittest.TestCase):

    def test_that_an_empty_corpus_raises(self):
        with self.assertRaises(exceptions.EmptyCorpus):
            vocab.ingest_corpus(['', '   ', '\t'])

    def test_that_no_lines_raise(self):
        with self.assertRaises(exceptions.EmptyCorpus):
            vocab.ingest_corpus([])

    def test_single_token(self):
        vocabulary = vocab.ingest_corpus(['hello'])
        self.assertEqual(len(vocabulary), 1)
        self.assertEqual(vocabulary.frequency('hello'), 1.0)

    def test_tokenize_splits_on_single_spaces(self):
        self.assertEqual(vocab.tokenize(' a  b\tc '), ['a', 'b\tc'])
        self.assertEqual(vocab.tokenize('x\x0cy \u2028 z\u3000'),
                         ['x\x0cy', '\u2028', 'z\u3000'])


class ClassifyTests(unittest.TestCase):

    def setUp(self):
        super(ClassifyTests, self).setUp()
        self.vocabulary = vocab.Vocabulary({'a': 3, 'b': 1})

    def test_that_frequency_equal_to_cutoff_is_infrequent(self):
        self.assertIs(vocab.classify_word(self.vocabulary, 'b', 0.25),
                      vocab.WordClass.INFREQUENT)

    def test_that_frequency_above_cutoff_is_frequent(self):
        self.assertIs(vocab.classify_word(self.vocabulary, 'a', 0.25),
                      vocab.WordClass.FREQUENT)

    def test_zero_cutoff_keeps_every_word(self):
        self.assertEqual(vocab.partition(self.vocabulary, 0.0),
                         (['a', 'b'], []))

    def test_infinite_cutoff_decomposes_every_word(self):
        self.assertEqual(vocab.partition(self.vocabulary, math.inf),
                         ([], ['a', 'b']))

    def test_that_unknown_words_raise(self):
        with self.assertRaises(exceptions.UnknownWord):
            vocab.classify_word(self.vocabulary, 'c', 0.0)


class CorpusStatsTests(unittest.TestCase):

    def test_raw_stats(self):
        stats = vocab.corpus_stats(['a b c', '', 'a b'])
        self.assertEqual(stats.sentence_count, 2)
        self.assertEqual(stats.token_count, 5)
        self.assertEqual(stats.distinct_token_count, 3)
        self.assertEqual(stats.avg_sentence_length, 2.5)

    def test_empty_input(self):
        stats = vocab.corpus_stats([])
        self.assertEqual(stats.avg_sentence_length, 0.0)
        self.assertEqual(stats.distinct_token_count, 0)

    def test_zero_cutoff_matches_raw_stats(self):
        model = fixtures.fitted_model()
        self.assertEqual(vocab.corpus_stats(model.lines, model.table, 0.0),
                         vocab.corpus_stats(model.lines))

    def test_infinite_cutoff_multiplies_length_by_m(self):
        model = fixtures.fitted_model()
        raw = vocab.corpus_stats(model.lines)
        encoded = vocab.corpus_stats(model.lines, model.table, math.inf)
        self.assertEqual(encoded.token_count, model.table.m * raw.token_count)
        self.assertEqual(encoded.sentence_count, raw.sentence_count)
        self.assertLessEqual(encoded.distinct_token_count,
                             sum(model.codebook.ks))

    def test_average_length_grows_with_the_cutoff(self):
        model = fixtures.fitted_model()
        grid = [0.0, 1e-4, 5e-4, 1e-3, 5e-3, 1e-2, math.inf]
        lengths = [vocab.corpus_stats(model.lines, model.table,
                                      f_ct).avg_sentence_length
                   for f_ct in grid]
        for previous, current in zip(lengths, lengths[1:]):
            self.assertLessEqual(previous, current)


class FilterByLengthTests(unittest.TestCase):

    def test_that_long_sentences_are_dropped(self):
        with self.assertLogs('logoquant.vocab', 'WARNING'):
            kept = vocab.filter_by_length(['a b c', 'a', 'a b'], 2)
        self.assertEqual(kept, ['a', 'a b'])

    def test_that_short_sentences_are_kept(self):
        self.assertEqual(vocab.filter_by_length(['a b'], 2), ['a b'])
