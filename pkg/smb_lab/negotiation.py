"""Selecting how a report is rendered to stdout.

Reports are always written to disk in every format. What is printed to the
terminal is negotiated: the config's ``accept`` field is matched against the
available renderers the way an HTTP server matches an ``Accept`` header.

.. code-block:: python

    from smb_lab import negotiation

    media_type, render = negotiation.select_renderer('text/csv;q=1, */*;q=0.1')
    print(render(envelope))

If no custom renderers are supplied, reports are rendered to JSON.

Customizing negotiation
=======================

Renderers are callables that receive a `ReportEnvelope <smb_lab.reports.ReportEnvelope>`
and return text.

.. code-block:: python

    from collections import OrderedDict

    def render_flags(envelope):
        return ' '.join('{}={}'.format(k, v) for k, v in sorted(envelope.pass_flags.items()))

    renderers = OrderedDict([
        ('text/plain', render_flags),
        ('application/json', negotiation.render_json),
    ])

.. note::

    We use an `OrderedDict <collections.OrderedDict>` of renderers because priority is
    given to the first specified renderer when the requested media type is not supported.
"""
from collections import OrderedDict
import json as pyjson

import mimeparse

from . import exceptions
from .reports import envelope_to_csv

__all__ = (
    'select_renderer',
    'JSONRenderer',
    'CSVRenderer',
    'render_json',
    'render_csv',
    'DEFAULTS',
)


# ###### Renderers ######

# Use a class so that json module is easily override-able
class JSONRenderer:
    """Callable object which renders a report (or any JSON-ready value) to JSON."""
    json_module = pyjson

    def __repr__(self):
        return '<JSONRenderer()>'

    def __call__(self, data):
        if hasattr(data, 'to_dict'):
            data = data.to_dict()
        return self.json_module.dumps(data, sort_keys=True, allow_nan=False, indent=2)


class CSVRenderer:
    """Callable object which renders the row table of a report to CSV."""

    def __repr__(self):
        return '<CSVRenderer()>'

    def __call__(self, envelope):
        return envelope_to_csv(envelope)


#: Render data to JSON. Singleton `JSONRenderer`.
render_json = JSONRenderer()

#: Render a report's rows to CSV. Singleton `CSVRenderer`.
render_csv = CSVRenderer()


# ##### Negotiation strategies #####

#: Default configuration
DEFAULTS = {
    'RENDERERS': OrderedDict([
        ('application/json', render_json),
        ('text/csv', render_csv),
    ]),
    'FORCE_NEGOTIATION': True,
}


def select_renderer(accept: str = None, renderers: OrderedDict = None, force=None):
    """
    Given an accept string, a mapping of renderers, and the ``force`` option,
    return a two-tuple of: (media type, render callable). Uses mimeparse to find
    the best media type match. An empty ``accept`` selects the first renderer.

    :raises ConfigError: Nothing matches and ``force`` is off.
    """
    renderers = DEFAULTS['RENDERERS'] if renderers is None else renderers
    force = DEFAULTS['FORCE_NEGOTIATION'] if force is None else force
    if not accept:
        return tuple(renderers.items())[0]
    header = accept
    try:
        best_match = mimeparse.best_match(renderers.keys(), header)
    except ValueError as error:
        raise exceptions.ConfigError('malformed accept value {!r}'.format(header)) from error
    if not best_match or best_match not in renderers:
        if force:
            return tuple(renderers.items())[0]
        else:
            raise exceptions.ConfigError('no renderer for {!r}'.format(header))
    return best_match, renderers[best_match]
