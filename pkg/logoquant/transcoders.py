"""Document Transcoders"""
import collections.abc
import dataclasses
import enum
import json
import math
import pathlib
import typing

import numpy as np
try:
    import yaml
except ImportError:  # pragma: nocover
    yaml = None

from logoquant import exceptions

PACKABLE_TYPES = (bool, int, str)


def default() -> typing.Dict[str, 'Text']:
    """Return the default transcoders keyed by file extension

    :rtype: dict

    """
    transcoders = {'.json': JSON(), '.jsonl': JSON()}
    if yaml:  # pragma: nocover
        transcoders['.yaml'] = YAML()
        transcoders['.yml'] = YAML()
    return transcoders


def for_path(path: typing.Union[str, pathlib.Path]) -> 'Text':
    """Return the transcoder for a file, selected by its extension

    :param path: The file path
    :raises: logoquant.exceptions.ConfigurationError

    """
    suffix = pathlib.Path(path).suffix.lower()
    transcoders = default()
    if suffix not in transcoders:
        if suffix in ('.yaml', '.yml'):
            raise exceptions.ConfigurationError(
                'YAML error: missing pyyaml, install logoquant[yaml]')
        raise exceptions.ConfigurationError(
            'No transcoder for {!r} files'.format(suffix))
    return transcoders[suffix]


def canonical(value: typing.Any) -> bytes:
    """Return the canonical JSON bytes of ``value`` used for checksums

    Keys are sorted and separators are compact so that equal documents
    always produce equal bytes.

    """
    return json.dumps(_normalize(value), sort_keys=True, ensure_ascii=False,
                      separators=(',', ':'), allow_nan=False).encode('utf-8')


class Text:

    """Transcodes between textual and object representations.

    This transcoder wraps functions that transcode between :class:`str`
    and :class:`object` instances.  In particular, it handles the
    additional step of transcoding into :class:`bytes` instances.

    :param str encoding: The string encoding to use

    """

    ENCODING = 'UTF-8'

    def __init__(self, encoding: typing.Optional[str] = None):
        """Create a new text transcoder instance"""
        self.encoding = encoding or self.ENCODING

    def to_bytes(self, value: typing.Any) -> bytes:
        """Transform an object into :class:`bytes`.

        :param mixed value: object to encode

        """
        return self._marshall(value, self.encoding)

    def from_bytes(self, data: bytes) -> typing.Any:
        """Get an object from :class:`bytes`

        :param bytes data: stream of bytes to decode
        :raises: logoquant.exceptions.CorruptFile

        """
        try:
            return self._unmarshall(data, self.encoding)
        except (UnicodeDecodeError, ValueError) as error:
            raise exceptions.CorruptFile(
                'Unable to decode document: {}'.format(error))

    def load(self, path: typing.Union[str, pathlib.Path]) -> typing.Any:
        """Read and decode a document file"""
        with open(path, 'rb') as handle:
            return self.from_bytes(handle.read())

    @staticmethod
    def _marshall(value, encoding):
        value = _normalize(value)
        if isinstance(value, str):
            value = value.encode(encoding)
        return value

    @staticmethod
    def _unmarshall(value, encoding):
        return value.decode(encoding)


class JSON(Text):

    """JSON Transcoder

    Documents are indented for human inspection, with keys kept in their
    insertion order. Non-finite floats are refused.

    """

    @staticmethod
    def _marshall(value, encoding):
        """Dump a :class:`value` instance into JSON :class:`bytes`

        :param object value: the object to dump
        :rtype: bytes

        """
        return (json.dumps(_normalize(value), indent=1, ensure_ascii=False,
                           allow_nan=False) + '\n').encode(encoding)

    @staticmethod
    def _unmarshall(value, encoding):
        """Transform :class:`bytes` into an :class:`object` instance."""
        return json.loads(value.decode(encoding))


class YAML(Text):

    """YAML Transcoder

    Transcode objects into YAML using the ``pyyaml`` library.

    """

    def __init__(self, encoding: typing.Optional[str] = None):
        """Create a new YAML transcoder.

        :param str encoding: the encoding to use if none is specified.
            If omitted, this defaults to ``UTF-8``.

        """
        if yaml is None:  # pragma: nocover
            raise RuntimeError('YAML error: missing pyyaml')
        super(YAML, self).__init__(encoding)

    @staticmethod
    def _marshall(value, encoding):
        return yaml.safe_dump(_normalize(value),
                              sort_keys=False).encode(encoding)

    @staticmethod
    def _unmarshall(value, encoding):
        try:
            return yaml.safe_load(value.decode(encoding))
        except yaml.YAMLError as error:
            raise ValueError(str(error))


def _normalize(value):
    """Normalize mixed values

    Provides plain representations for the numpy, enum and dataclass
    values that flow through codebooks, configurations and manifests.

    :param mixed value: the value to normalize
    :return: the normalized value
    :raises TypeError: when `value` cannot be normalized

    """
    if value is None:
        return value
    elif isinstance(value, enum.Enum):
        return value.value
    elif isinstance(value, PACKABLE_TYPES):
        return value
    elif isinstance(value, float):
        return 'inf' if math.isinf(value) and value > 0 else value
    elif isinstance(value, np.integer):
        return int(value)
    elif isinstance(value, np.floating):
        return _normalize(float(value))
    elif isinstance(value, np.ndarray):
        return [_normalize(item) for item in value.tolist()]
    elif isinstance(value, pathlib.PurePath):
        return str(value)
    elif dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {field.name: _normalize(getattr(value, field.name))
                for field in dataclasses.fields(value)}
    elif isinstance(value, collections.abc.Mapping):
        return {str(k): _normalize(v) for k, v in value.items()}
    elif isinstance(value, (collections.abc.Sequence, collections.abc.Set)):
        return [_normalize(item) for item in value]
    raise TypeError('{} is not supported'.format(value.__class__.__name__))
