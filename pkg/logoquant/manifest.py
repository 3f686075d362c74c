"""
Run Manifests
=============

Every command line run appends one JSON document describing what it did,
which is enough to rerun it: the configuration, the checksums of its input
files, the codebook checksum, per stage timings and the outcome.

"""
import contextlib
import dataclasses
import datetime
import logging
import time
import typing

from logoquant import storage, transcoders, version

LOGGER = logging.getLogger(__name__)

SUCCESS = 'success'


@dataclasses.dataclass
class RunManifest:
    """Record of a single command run"""
    command: str
    config: typing.Dict[str, typing.Any] = dataclasses.field(
        default_factory=dict)
    inputs: typing.Dict[str, str] = dataclasses.field(default_factory=dict)
    codebook_checksum: typing.Optional[str] = None
    timings: typing.Dict[str, float] = dataclasses.field(default_factory=dict)
    outcome: str = SUCCESS
    exit_code: int = 0
    started: str = dataclasses.field(
        default_factory=lambda: datetime.datetime.now(
            datetime.timezone.utc).isoformat())
    version: str = version.__version__

    def add_input(self, name: str, path: storage.PathLike) -> None:
        """Record the checksum of an input file"""
        self.inputs[name] = storage.file_checksum(path)

    @contextlib.contextmanager
    def stage(self, name: str) -> typing.Iterator[None]:
        """Time the enclosed block as stage ``name``, in milliseconds"""
        start = time.perf_counter()
        try:
            yield
        finally:
            self.timings[name] = 1000.0 * (time.perf_counter() - start)
            LOGGER.debug('Stage %s took %.2fms', name, self.timings[name])

    def fail(self, error: Exception, exit_code: int) -> None:
        self.outcome = '{}: {}'.format(error.__class__.__name__, error)
        self.exit_code = exit_code

    def append(self, path: storage.PathLike) -> None:
        """Append the manifest as one JSON line to ``path``"""
        line = transcoders.canonical(self).decode('utf-8')
        with storage.open_text(path, 'a') as handle:
            handle.write(line + '\n')
        LOGGER.debug('Appended %s manifest to %s', self.command, path)


def read_manifests(path: storage.PathLike) \
        -> typing.List[typing.Dict[str, typing.Any]]:
    """Return every manifest recorded in ``path``, oldest first"""
    codec = transcoders.JSON()
    return [codec.from_bytes(line.encode('utf-8'))
            for line in storage.read_lines(path) if line.strip()]
