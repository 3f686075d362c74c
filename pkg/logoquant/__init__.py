"""Logoquant Vocabulary Compression"""
try:
    from logoquant.codec import (SymbolTable, decode_corpus, encode_corpus,
                                 load_codebook, save_codebook)
    from logoquant.config import EncoderConfig
    from logoquant.dod import degree_of_distinctness, fit
    from logoquant.embedding import EmbeddingMatrix
    from logoquant.pq import Codebook
    from logoquant.vocab import Vocabulary
except ImportError:  # pragma: nocover
    # Allows for importing the version when setting up
    Codebook = None
    EmbeddingMatrix = None
    EncoderConfig = None
    SymbolTable = None
    Vocabulary = None
    decode_corpus = None
    degree_of_distinctness = None
    encode_corpus = None
    fit = None
    load_codebook = None
    save_codebook = None
from logoquant.exceptions import LogoquantException
from logoquant.version import __version__

__all__ = [
    '__version__',
    'cli',
    'codec',
    'config',
    'dod',
    'embedding',
    'exceptions',
    'pq',
    'vocab',
    'Codebook',
    'EmbeddingMatrix',
    'EncoderConfig',
    'LogoquantException',
    'SymbolTable',
    'Vocabulary',
    'decode_corpus',
    'degree_of_distinctness',
    'encode_corpus',
    'fit',
    'load_codebook',
    'save_codebook'
]
