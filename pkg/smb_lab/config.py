"""Experiment configs.

A config is a single JSON file naming the spec, the command, the seed and the
command's parameters:

.. code-block:: json

    {
        "spec_path": "specs/markov_example.json",
        "command": "mixing",
        "seed": 1,
        "output_dir": "out/mixing",
        "parameters": {"delta_grid": [1, 2, 3, 4, 5, 6]},
        "accept": "text/csv"
    }

``seed`` is required: nothing is ever seeded from the clock. A relative
``spec_path`` is resolved against the directory holding the config file.
"""
from collections.abc import Mapping
from dataclasses import dataclass, field, replace
import json
import os

from . import exceptions
from .commands import DEFAULTS as COMMAND_DEFAULTS
from .constants import COMMANDS

__all__ = (
    'ExperimentConfig',
    'load_config',
)

#: Keys a config file may contain.
CONFIG_KEYS = ('spec_path', 'command', 'seed', 'output_dir', 'parameters', 'accept')

#: Default configuration
DEFAULTS = {
    'output_dir': 'smb-lab-output',
    'accept': 'application/json',
}


@dataclass(frozen=True)
class ExperimentConfig:
    spec_path: str
    command: str
    seed: int
    output_dir: str = DEFAULTS['output_dir']
    parameters: dict = field(default_factory=dict)
    accept: str = DEFAULTS['accept']

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise exceptions.ConfigError('unknown command {!r}; expected one of {}'.format(
                self.command, ', '.join(COMMANDS)))
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            raise exceptions.ConfigError('seed must be a nonnegative integer, got {!r}'.format(
                self.seed))
        if not isinstance(self.parameters, Mapping):
            raise exceptions.ConfigError('parameters must be a mapping')

    @classmethod
    def from_dict(cls, raw: Mapping, base_dir: str = None):
        if not isinstance(raw, Mapping):
            raise exceptions.ConfigError('config must be a JSON object')
        unknown = sorted(set(raw) - set(CONFIG_KEYS))
        if unknown:
            raise exceptions.ConfigError('unknown config keys: {}'.format(', '.join(unknown)))
        for key in ('spec_path', 'command', 'seed'):
            if key not in raw:
                raise exceptions.ConfigError('config is missing {!r}'.format(key))
        spec_path = raw['spec_path']
        if base_dir and not os.path.isabs(spec_path):
            spec_path = os.path.normpath(os.path.join(base_dir, spec_path))
        return cls(
            spec_path=spec_path,
            command=raw['command'],
            seed=raw['seed'],
            output_dir=raw.get('output_dir', DEFAULTS['output_dir']),
            parameters=raw.get('parameters', {}),
            accept=raw.get('accept', DEFAULTS['accept']),
        )

    def to_dict(self):
        """Echo written into every report. Parameters the config leaves out are
        filled in with the command's defaults. The output directory and the accept
        value only affect where and how a report is shown, so they are left out.
        """
        return {
            'spec_path': os.path.basename(self.spec_path),
            'command': self.command,
            'seed': self.seed,
            'parameters': {**COMMAND_DEFAULTS[self.command], **self.parameters},
        }


def load_config(path, seed: int = None, output_dir: str = None) -> ExperimentConfig:
    """Read a config file, applying the command-line overrides ``seed`` and
    ``output_dir``.

    :raises ConfigError: The file is not valid JSON or misses a required field.
    """
    try:
        with open(path) as fp:
            raw = json.load(fp)
    except json.JSONDecodeError as error:
        raise exceptions.ConfigError('{}: {}'.format(path, error)) from error
    except OSError as error:
        raise exceptions.ConfigError('cannot read config {}: {}'.format(path, error)) from error
    config = ExperimentConfig.from_dict(raw, base_dir=os.path.dirname(os.path.abspath(path)))
    overrides = {}
    if seed is not None:
        overrides['seed'] = seed
    if output_dir is not None:
        overrides['output_dir'] = output_dir
    return replace(config, **overrides) if overrides else config
