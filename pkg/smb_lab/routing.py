"""Dispatch from command names to handlers."""
from collections.abc import Mapping
from contextlib import contextmanager
import importlib

from . import exceptions

__all__ = (
    'CommandRouter',
    'add_command_context',
)


class CommandRouter(Mapping):
    """Registry of command handlers. A handler receives ``(spec, parameters, seed)``
    and returns a `CommandResult <smb_lab.commands.CommandResult>`.

    Example:

    .. code-block:: python

        from smb_lab.routing import CommandRouter

        router = CommandRouter()
        router.add_command('entropy', run_entropy)

        router['entropy'](spec, {}, seed=0)

    Several handlers from one module are registered with `add_command_context`.
    """

    def __init__(self):
        self._handlers = {}

    def __getitem__(self, name):
        try:
            return self._handlers[name]
        except KeyError:
            raise exceptions.ConfigError('no handler for command {!r}'.format(name)) from None

    def __iter__(self):
        return iter(self._handlers)

    def __len__(self):
        return len(self._handlers)

    def __repr__(self):
        return '<CommandRouter({})>'.format(', '.join(sorted(self._handlers)))

    def add_command(self, name: str, handler):
        """Register ``handler`` under ``name``.

        :raises ValueError: ``name`` is already taken.
        """
        if name in self._handlers:
            raise ValueError('command {!r} is already registered'.format(name))
        self._handlers[name] = handler
        return handler


@contextmanager
def add_command_context(router: CommandRouter, module=None, name_prefix: str = None):
    """Context manager which yields a function for adding multiple commands from a given
    module.

    Example:

    .. code-block:: python

        with add_command_context(router, module='smb_lab.commands') as command:
            command('entropy', 'run_entropy')
            command('smb-path', 'run_smb_path')

    :param router: Router to add commands to.
    :param module: Import path to module (str) or module object which contains the handlers.
    :param name_prefix: Prefix to prepend to all command names.
    """
    if isinstance(module, (str, bytes)):
        module = importlib.import_module(module)

    def add_command(name, handler):
        """
        :param str name: Command name.
        :param handler: A handler function or the name of a handler function contained
            in `module`.
        """
        if isinstance(handler, (str, bytes)):
            if not module:
                raise ValueError(
                    'Must pass module to add_command_context if passing handler name strings.'
                )
            handler = getattr(module, handler)
        name = '.'.join((name_prefix, name)) if name_prefix else name
        return router.add_command(name, handler)
    yield add_command
