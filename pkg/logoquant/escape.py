"""Token Escaping

Raw corpus tokens that could be mistaken for code symbols, or for the
encoded corpus header, are prefixed with a single backslash on encode and
restored on decode.

"""
import re
import typing

ESCAPE = '\\'
HEADER_TAG = '#lqc'
PREFIX_ALPHABET = '@$&#%=+~'

SYMBOL_PATTERN = re.compile(
    r'^[{}][0-9]+$'.format(re.escape(PREFIX_ALPHABET)))


def is_symbol(token: str) -> bool:
    """Return :data:`True` if ``token`` has the shape of a code symbol"""
    return SYMBOL_PATTERN.match(token) is not None


def needs_escape(token: str) -> bool:
    """Return :data:`True` if a raw ``token`` must be escaped"""
    return (token.startswith(ESCAPE) or token == HEADER_TAG
            or is_symbol(token))


def escape_token(token: str) -> str:
    """Escape a raw corpus token.

    :param str token: The raw token
    :rtype: str

    """
    return ESCAPE + token if needs_escape(token) else token


def unescape_token(token: str) -> str:
    """Undo :func:`escape_token`.

    :param str token: A token read from an encoded stream
    :rtype: str

    """
    return token[1:] if token.startswith(ESCAPE) else token


def escape_tokens(tokens: typing.Iterable[str]) -> typing.List[str]:
    """Escape every token of a sentence"""
    return [escape_token(token) for token in tokens]
