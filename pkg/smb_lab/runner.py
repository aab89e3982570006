"""Run one experiment config end to end: load the spec, dispatch the command,
wrap the result in a `ReportEnvelope <smb_lab.reports.ReportEnvelope>`, write it
to disk and render it to a stream.
::

    from smb_lab import run
    from smb_lab.config import load_config

    envelope = run(load_config('configs/mixing.json'))
    envelope.passed
"""
import logging
import sys

from . import __version__
from .commands import router as default_router
from .negotiation import select_renderer
from .process import load_spec
from .reports import ReportEnvelope, write_report

__all__ = (
    'run',
    'Runner',
)

logger = logging.getLogger(__name__)


class Runner:

    def __init__(
        self,
        config,
        router=None,
        renderers=None,
        stream=None,
        write: bool = True,
    ):
        self.config = config
        self.router = router if router is not None else default_router
        self.renderers = renderers
        self.stream = stream if stream is not None else sys.stdout
        self.write = write

    def __repr__(self):
        return '<Runner({self.config.command!r}, seed={self.config.seed})>'.format(self=self)

    def load_spec(self):
        return load_spec(self.config.spec_path)

    def make_envelope(self, spec, result):
        return ReportEnvelope(
            tool_version=__version__,
            command=self.config.command,
            spec_hash=spec.spec_hash,
            config_echo=self.config.to_dict(),
            columns=tuple(result.columns),
            rows=tuple(tuple(row) for row in result.rows),
            pass_flags=dict(result.pass_flags),
            metadata=dict(result.metadata),
            log_columns=tuple(result.log_columns),
        )

    def run(self) -> ReportEnvelope:
        handler = self.router[self.config.command]
        media_type, render = select_renderer(self.config.accept, self.renderers)
        spec = self.load_spec()
        logger.info('Running %s on %r (seed %d)', self.config.command, spec, self.config.seed)
        result = handler(spec, self.config.parameters, self.config.seed)
        envelope = self.make_envelope(spec, result)
        if self.write:
            write_report(envelope, self.config.output_dir)
        self.stream.write(render(envelope).rstrip('\n') + '\n')
        return envelope


def run(config, **kwargs):
    """Run an experiment config.

    :param config: An `ExperimentConfig <smb_lab.config.ExperimentConfig>`.
    :param router: `CommandRouter <smb_lab.routing.CommandRouter>` to dispatch with.
        Defaults to the built-in commands.
    :param renderers: Mapping of media types to renderers for the stream output.
    :param stream: Where the negotiated rendering is written. Defaults to stdout.
    :param bool write: Whether to write ``<command>.json`` and ``<command>.csv``
        into the config's output directory.
    """
    runner = Runner(config, **kwargs)
    return runner.run()
