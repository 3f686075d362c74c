"""
Command Line Interface
======================

``logoquant fit`` trains a codebook for a corpus vocabulary, ``encode`` and
``decode`` convert corpora, ``stats`` reports the effect of the cut-off
frequency and ``verify`` checks that a corpus survives a round trip.

Every run appends a manifest line. The exit status is 0 on success, 1 for
input and usage errors, 2 when the distinctness target can not be reached
and 3 for integrity failures.

"""
import argparse
import csv
import io
import logging
import sys
import typing

from logoquant import (codec, config, dod, embedding, exceptions, manifest,
                       storage, transcoders, version, vocab)

LOGGER = logging.getLogger(__name__)

DEFAULT_MANIFEST = 'logoquant-runs.jsonl'
LOG_FORMAT = '%(levelname)s %(name)s: %(message)s'

# Command line arguments that shape the output of each command
ARGUMENTS = {
    'fit': ('corpus', 'embeddings', 'synthetic_dim', 'missing',
            'max_sentence_tokens', 'out', 'trace'),
    'encode': ('codebook', 'fct', 'input', 'out', 'header',
               'max_length', 'dictionary'),
    'decode': ('codebook', 'input', 'out', 'lenient', 'search',
               'embeddings', 'report'),
    'stats': ('codebook', 'corpus', 'fct_grid', 'out'),
    'verify': ('codebook', 'corpus', 'fct')
}
SETTINGS = ('m', 'dod_target', 'eta', 'b', 'mode', 'density', 'strategy',
            'bandwidth', 'seed', 'max_rounds', 'max_iterations')
FLAGS = {'input': '--in'}


class ArgumentParser(argparse.ArgumentParser):
    """Reports usage errors with the input error exit status"""

    def error(self, message: str) -> typing.NoReturn:
        self.print_usage(sys.stderr)
        self.exit(1, '{}: error: {}\n'.format(self.prog, message))


def main(argv: typing.Optional[typing.Sequence[str]] = None) -> int:
    """Run the command line interface and return the exit status"""
    args = build_parser().parse_args(argv)
    level = logging.INFO
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    logging.basicConfig(level=level, format=LOG_FORMAT)
    run = manifest.RunManifest(args.command)
    try:
        run.exit_code = args.handler(args, run)
        if run.exit_code:
            run.outcome = 'failure'
    except exceptions.LogoquantException as error:
        LOGGER.error('%s', error)
        run.fail(error, error.exit_code)
    except OSError as error:
        LOGGER.error('%s', error)
        run.fail(error, 1)
    run.config['arguments'] = {name: getattr(args, name)
                               for name in ARGUMENTS[args.command]}
    try:
        run.append(args.manifest)
    except OSError as error:
        LOGGER.error('Unable to write the manifest: %s', error)
    return run.exit_code


def replay_command(record: typing.Dict[str, typing.Any],
                   **overrides: typing.Any) -> typing.List[str]:
    """Rebuild the command line of a recorded run

    ``overrides`` replace recorded arguments, for example to write the
    output of the rerun next to the original.

    """
    command = record['command']
    arguments = [command]
    if command == 'fit':
        for name in SETTINGS:
            value = record['config'].get(name)
            if name == 'bandwidth' and value is None:
                value = 'auto'
            if value is not None:
                arguments += ['--' + name.replace('_', '-'), str(value)]
    recorded = dict(record['config']['arguments'], **overrides)
    for name in ARGUMENTS[command]:
        value = recorded.get(name)
        if value is None or value is False:
            continue
        flag = FLAGS.get(name, '--' + name.replace('_', '-'))
        if value is True:
            arguments.append(flag)
        elif isinstance(value, list):
            arguments += [flag, ','.join(str(item) for item in value)]
        else:
            arguments += [flag, str(value)]
    return arguments


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(
        prog='logoquant',
        description='Compress a vocabulary into product quantized symbols')
    parser.add_argument('--version', action='version',
                        version='%(prog)s ' + version.__version__)
    parser.add_argument('--manifest', default=DEFAULT_MANIFEST,
                        help='run manifest file, one JSON line per run')
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument('-v', '--verbose', action='store_true')
    verbosity.add_argument('-q', '--quiet', action='store_true')
    commands = parser.add_subparsers(dest='command', metavar='COMMAND')
    commands.required = True

    fit = commands.add_parser('fit', help='train a codebook')
    fit.set_defaults(handler=cmd_fit)
    fit.add_argument('--corpus', required=True,
                     help='space separated corpus, one sentence per line')
    source = fit.add_mutually_exclusive_group(required=True)
    source.add_argument('--embeddings', help='GloVe style embedding file')
    source.add_argument('--synthetic-dim', type=int,
                        help='generate synthetic embeddings of this dimension')
    fit.add_argument('--missing', default=embedding.MISSING_ERROR,
                     choices=[embedding.MISSING_ERROR,
                              embedding.MISSING_SYNTHESIZE],
                     help='policy for vocabulary words without a vector')
    fit.add_argument('--config', help='YAML or JSON settings file')
    fit.add_argument('--m', type=int)
    fit.add_argument('--dod-target', type=float)
    fit.add_argument('--eta', type=int)
    fit.add_argument('--b', type=float)
    fit.add_argument('--mode', choices=[m.value for m in config.SeedingMode])
    fit.add_argument('--density',
                     choices=[d.value for d in config.DensityMode])
    fit.add_argument('--strategy',
                     choices=[s.value for s in config.Strategy])
    fit.add_argument('--bandwidth', type=_bandwidth,
                     help='KDE bandwidth or "auto"')
    fit.add_argument('--seed', type=int)
    fit.add_argument('--max-rounds', type=int)
    fit.add_argument('--max-iterations', type=int)
    fit.add_argument('--threads', type=int)
    fit.add_argument('--max-sentence-tokens', type=int,
                     help='drop longer corpus sentences before fitting')
    fit.add_argument('--out', required=True, help='codebook file to write')
    fit.add_argument('--trace', help='fit trace file, default OUT.trace.tsv')

    encode = commands.add_parser('encode', help='encode a corpus')
    encode.set_defaults(handler=cmd_encode)
    encode.add_argument('--codebook', required=True)
    encode.add_argument('--fct', type=float, default=0.0,
                        help='cut-off frequency, "inf" decomposes every word')
    encode.add_argument('--in', dest='input', required=True)
    encode.add_argument('--out', required=True)
    encode.add_argument('--header', action='store_true',
                        help='lead the output with the symbol table checksum')
    encode.add_argument('--max-length', type=int,
                        help='drop sentences with more tokens')
    encode.add_argument('--dictionary',
                        help='write the encoded token counts to this file')

    decode = commands.add_parser('decode', help='decode a corpus')
    decode.set_defaults(handler=cmd_decode)
    decode.add_argument('--codebook', required=True)
    decode.add_argument('--in', dest='input', required=True)
    decode.add_argument('--out', required=True)
    decode.add_argument('--lenient', action='store_true',
                        help='replace malformed symbol groups by '
                             + codec.UNKNOWN)
    decode.add_argument('--search', default=config.SearchSpace.CODEWORD.value,
                        choices=[s.value for s in config.SearchSpace])
    decode.add_argument('--embeddings',
                        help='embedding file for the embedding search space')
    decode.add_argument('--report', help='write the recovery report here')

    stats = commands.add_parser('stats', help='report cut-off statistics')
    stats.set_defaults(handler=cmd_stats)
    stats.add_argument('--codebook', required=True)
    stats.add_argument('--corpus', required=True)
    stats.add_argument('--fct-grid', type=_grid, default=[0.0],
                       help='comma separated cut-off frequencies')
    stats.add_argument('--out', help='CSV file, standard output by default')

    verify = commands.add_parser('verify', help='check a round trip')
    verify.set_defaults(handler=cmd_verify)
    verify.add_argument('--codebook', required=True)
    verify.add_argument('--corpus', required=True)
    verify.add_argument('--fct', type=float, default=0.0)
    return parser


def cmd_fit(args: argparse.Namespace, run: manifest.RunManifest) -> int:
    settings = load_settings(args)
    run.config = settings.as_dict()
    run.add_input('corpus', args.corpus)
    with run.stage('ingest'):
        lines = storage.read_lines(args.corpus)
        if args.max_sentence_tokens is not None:
            lines = vocab.filter_by_length(lines, args.max_sentence_tokens)
        vocabulary = vocab.ingest_corpus(lines)
    with run.stage('embeddings'):
        if args.embeddings:
            run.add_input('embeddings', args.embeddings)
            matrix, _oov = embedding.load_embeddings(
                args.embeddings, vocabulary, args.missing, settings.seed)
        else:
            matrix = embedding.synthesize_embeddings(
                vocabulary, args.synthetic_dim, settings.seed)
    with run.stage('fit'):
        codebook, report, trace = dod.fit(matrix, settings)
    with run.stage('save'):
        table = codec.build_symbol_table(vocabulary, codebook, matrix)
        codec.save_codebook(codebook, table, args.out)
        with storage.atomic_write(args.trace or args.out + '.trace.tsv') \
                as handle:
            for line in dod.format_trace(trace):
                handle.write(line + '\n')
    run.codebook_checksum = codebook.checksum()
    _write_stdout(
        'ks={} dictionary={} reduction={:.2f} distinct={}/{} dod={!r}'.format(
            ','.join(str(k) for k in codebook.ks),
            dod.dictionary_size(codebook.ks),
            dod.vocab_reduction(len(vocabulary), codebook.ks),
            report.distinct_codewords, report.vocab_size, report.value))
    return 0


def cmd_encode(args: argparse.Namespace, run: manifest.RunManifest) -> int:
    codebook, table = _load_codebook(args.codebook, run)
    run.config = dict(codebook.training_config, f_ct=_config_float(args.fct))
    run.add_input('corpus', args.input)
    with run.stage('encode'):
        lines = storage.read_lines(args.input)
        if args.max_length is not None:
            lines = vocab.filter_by_length(lines, args.max_length)
        encoded = codec.encode_lines(lines, table, args.fct)
    with run.stage('save'):
        _write_lines(args.out, encoded.text_lines(args.header))
        if args.dictionary:
            transcoder = transcoders.for_path(args.dictionary)
            with storage.atomic_write(args.dictionary, binary=True) as handle:
                handle.write(transcoder.to_bytes(
                    codec.encoded_dictionary(encoded.lines)))
    LOGGER.info('Encoded %i lines into %s', len(encoded.lines), args.out)
    return 0


def cmd_decode(args: argparse.Namespace, run: manifest.RunManifest) -> int:
    codebook, table = _load_codebook(args.codebook, run)
    search = config.SearchSpace(args.search)
    run.config = dict(codebook.training_config, search=search.value,
                      lenient=args.lenient)
    run.add_input('corpus', args.input)
    matrix = None
    if args.embeddings:
        run.add_input('embeddings', args.embeddings)
        matrix, _oov = embedding.load_embeddings(args.embeddings,
                                                 table.vocabulary)
    with run.stage('decode'):
        lines, report = codec.decode_corpus(
            storage.read_lines(args.input), table, codebook, matrix,
            search, args.lenient)
    with run.stage('save'):
        _write_lines(args.out, lines)
        if args.report:
            with storage.atomic_write(args.report, binary=True) as handle:
                handle.write(transcoders.for_path(args.report).to_bytes(
                    report))
    _write_stdout(report.summary())
    return 0


def cmd_stats(args: argparse.Namespace, run: manifest.RunManifest) -> int:
    codebook, table = _load_codebook(args.codebook, run)
    run.config = dict(codebook.training_config,
                      fct_grid=[_config_float(f_ct) for f_ct in args.fct_grid])
    run.add_input('corpus', args.corpus)
    with run.stage('stats'):
        lines = storage.read_lines(args.corpus)
        raw = vocab.corpus_stats(lines)
        output = io.StringIO()
        writer = csv.writer(output, lineterminator='\n')
        writer.writerow(['f_ct', 'distinct_tokens', 'avg_sentence_length'])
        for f_ct in args.fct_grid:
            stats = vocab.corpus_stats(lines, table, f_ct)
            writer.writerow([repr(f_ct), stats.distinct_token_count,
                             repr(stats.avg_sentence_length)])
    LOGGER.info('Raw corpus: %i distinct tokens, average length %r, '
                'dictionary size %i', raw.distinct_token_count,
                raw.avg_sentence_length, dod.dictionary_size(codebook.ks))
    if args.out:
        with storage.atomic_write(args.out) as handle:
            handle.write(output.getvalue())
    else:
        sys.stdout.write(output.getvalue())
    return 0


def cmd_verify(args: argparse.Namespace, run: manifest.RunManifest) -> int:
    codebook, table = _load_codebook(args.codebook, run)
    run.config = dict(codebook.training_config, f_ct=_config_float(args.fct))
    run.add_input('corpus', args.corpus)
    with run.stage('verify'):
        lines = storage.read_lines(args.corpus)
        encoded = codec.encode_lines(lines, table, args.fct)
        decoded, report = codec.decode_corpus(encoded.lines, table, codebook)
    mismatches = [number for number, (original, restored)
                  in enumerate(zip(lines, decoded), 1)
                  if ' '.join(vocab.tokenize(original)) != restored]
    _write_stdout(report.summary())
    if mismatches:
        LOGGER.error('%i of %i lines differ after a round trip, first on '
                     'line %i', len(mismatches), len(lines), mismatches[0])
        return 1
    LOGGER.info('All %i lines survive a round trip', len(lines))
    return 0


def load_settings(args: argparse.Namespace) -> config.EncoderConfig:
    """Merge the settings file with the flags given on the command line

    :raises: logoquant.exceptions.ConfigurationError

    """
    settings = {}  # type: config.Settings
    if args.config:
        document = transcoders.for_path(args.config).load(args.config)
        if not isinstance(document, dict):
            raise exceptions.ConfigurationError(
                '{} does not hold a mapping of settings'.format(args.config))
        settings.update(document)
    for name in ('m', 'dod_target', 'eta', 'b', 'mode', 'density',
                 'strategy', 'seed', 'max_rounds', 'max_iterations',
                 'threads'):
        value = getattr(args, name)
        if value is not None:
            settings[name] = value
    if args.bandwidth is not None:
        settings['bandwidth'] = None if args.bandwidth == 'auto' \
            else args.bandwidth
    return config.from_settings(settings)


def _bandwidth(value: str) -> typing.Union[str, float]:
    if value.lower() == 'auto':
        return 'auto'
    try:
        return float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(
            'invalid bandwidth: {!r}'.format(value))


def _grid(value: str) -> typing.List[float]:
    try:
        return [float(item) for item in value.split(',') if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError('invalid grid: {!r}'.format(value))


def _config_float(value: float) -> typing.Union[float, str]:
    return 'inf' if value == float('inf') else value


def _load_codebook(path: str, run: manifest.RunManifest):
    run.add_input('codebook', path)
    with run.stage('load'):
        codebook, table = codec.load_codebook(path)
    run.codebook_checksum = codebook.checksum()
    return codebook, table


def _write_lines(path: str, lines: typing.Iterable[str]) -> None:
    with storage.atomic_write(path) as handle:
        for line in lines:
            handle.write(line + '\n')


def _write_stdout(message: str) -> None:
    sys.stdout.write(message + '\n')
