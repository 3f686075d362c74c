"""File Helpers"""
import contextlib
import gzip
import hashlib
import logging
import os
import pathlib
import tempfile
import typing

LOGGER = logging.getLogger(__name__)

PathLike = typing.Union[str, os.PathLike]


def open_text(path: PathLike, mode: str = 'r') -> typing.TextIO:
    """Open a UTF-8 text file, transparently handling ``.gz`` files

    :param path: The file to open
    :param mode: ``r``, ``w`` or ``a``

    """
    if str(path).endswith('.gz'):
        return gzip.open(path, mode + 't', encoding='utf-8', newline='\n')
    return open(path, mode, encoding='utf-8', newline='\n')


def read_lines(path: PathLike) -> typing.List[str]:
    """Return the lines of a text file without their line terminators

    Only ``\\n`` ends a line. Other characters Unicode treats as line
    boundaries stay part of the line.

    """
    with open_text(path) as handle:
        lines = handle.read().split('\n')
    if lines[-1] == '':
        lines.pop()
    return lines


@contextlib.contextmanager
def atomic_write(path: PathLike, binary: bool = False) \
        -> typing.Iterator[typing.IO]:
    """Write a file by renaming a completed temporary sibling into place

    Nothing is written to ``path`` when the block raises.

    :param path: The destination file
    :param binary: Open the temporary file in binary mode

    """
    path = pathlib.Path(path)
    directory = path.parent if str(path.parent) else pathlib.Path('.')
    fd, temporary = tempfile.mkstemp(
        dir=str(directory), prefix='.{}.'.format(path.name), suffix='.tmp')
    try:
        if binary:
            handle = os.fdopen(fd, 'wb')
        elif path.suffix == '.gz':
            os.close(fd)
            handle = gzip.open(temporary, 'wt', encoding='utf-8',
                               newline='\n')
        else:
            handle = os.fdopen(fd, 'w', encoding='utf-8', newline='\n')
        with handle:
            yield handle
        os.replace(temporary, str(path))
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(temporary)
        raise
    LOGGER.debug('Wrote %s', path)


def file_checksum(path: PathLike) -> str:
    """Return the SHA-256 hex digest of a file's bytes"""
    digest = hashlib.sha256()
    with open(path, 'rb') as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b''):
            digest.update(chunk)
    return digest.hexdigest()


def bytes_checksum(value: bytes) -> str:
    """Return the SHA-256 hex digest of ``value``"""
    return hashlib.sha256(value).hexdigest()
