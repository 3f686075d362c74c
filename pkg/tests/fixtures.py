"""Seeded synthetic corpora, embeddings and fitted models for the tests"""
import functools
import typing

import numpy as np

from logoquant import codec, config, dod, embedding, pq, vocab


def synthetic_corpus(vocab_size: int = 300,
                     sentences: int = 200,
                     seed: int = 7,
                     min_length: int = 3,
                     max_length: int = 12) -> typing.List[str]:
    """Return sentences over ``w0 ... w{vocab_size - 1}``

    Every word occurs at least once, the remaining tokens follow a Zipf
    distribution so that low indices are frequent.

    """
    rng = np.random.default_rng(seed)
    lengths = rng.integers(min_length, max_length + 1, size=sentences)
    total = int(lengths.sum())
    if total < vocab_size:
        raise ValueError('Too few tokens to cover the vocabulary')
    weights = 1.0 / np.arange(1, vocab_size + 1)
    tokens = np.concatenate([
        np.arange(vocab_size),
        rng.choice(vocab_size, size=total - vocab_size,
                   p=weights / weights.sum())])
    rng.shuffle(tokens)
    lines, offset = [], 0
    for length in lengths:
        lines.append(' '.join('w{}'.format(token)
                              for token in tokens[offset:offset + length]))
        offset += length
    return lines


class Model(typing.NamedTuple):
    lines: typing.List[str]
    vocabulary: vocab.Vocabulary
    matrix: embedding.EmbeddingMatrix
    codebook: pq.Codebook
    table: codec.SymbolTable


@functools.lru_cache(maxsize=None)
def fitted_model(vocab_size: int = 300,
                 sentences: int = 200,
                 dim: int = 6,
                 seed: int = 42) -> Model:
    """Return a corpus with a codebook fitted to full distinctness"""
    lines = synthetic_corpus(vocab_size, sentences)
    vocabulary = vocab.ingest_corpus(lines)
    matrix = embedding.synthesize_embeddings(vocabulary, dim, seed)
    codebook, _report, _trace = dod.fit(
        matrix, config.EncoderConfig(seed=seed, threads=1))
    table = codec.build_symbol_table(vocabulary, codebook, matrix)
    return Model(lines, vocabulary, matrix, codebook, table)


def median_frequency(vocabulary: vocab.Vocabulary) -> float:
    return float(np.median([vocabulary.frequency(word)
                            for word in vocabulary]))
