"""Report envelopes and their JSON / CSV representations.

Every command produces one `ReportEnvelope`. It is written twice: as
``<command>.json`` (the whole envelope) and as ``<command>.csv`` (the row table
only, ready for plotting).

.. code-block:: python

    from smb_lab import reports

    paths = reports.write_report(envelope, 'out/')
    diff = reports.compare_reports('out/mixing.json', 'baseline/mixing.json')
    diff.max_deviation['beta']

Both representations are deterministic: keys are sorted, floats are written
with 17 significant digits in the CSV and with their shortest round-trip repr in
the JSON, and nothing depends on the time of the run. The only non-finite value
ever written is ``-inf``, as the literal token ``"-inf"``, and only in the
columns listed in ``log_columns``.
"""
from dataclasses import dataclass, field
import csv
import io
import json
import logging
import math
import os

import numpy as np

from . import exceptions
from .constants import FLOAT_FORMAT, NEG_INF_TOKEN

__all__ = (
    'ReportEnvelope',
    'ReportDiff',
    'envelope_to_json',
    'envelope_to_csv',
    'write_report',
    'load_report',
    'compare_reports',
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ReportEnvelope:
    tool_version: str
    command: str
    spec_hash: str
    config_echo: dict
    columns: tuple
    rows: tuple
    pass_flags: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)
    log_columns: tuple = ()

    def __post_init__(self):
        width = len(self.columns)
        for index, row in enumerate(self.rows):
            if len(row) != width:
                raise ValueError('row {} has {} cells, expected {}'.format(index, len(row), width))

    @property
    def passed(self):
        return all(self.pass_flags.values())

    def to_dict(self):
        log_indices = {self.columns.index(name) for name in self.log_columns}
        rows = [
            [_plain(value, allow_neg_inf=index in log_indices) for index, value in enumerate(row)]
            for row in self.rows
        ]
        return {
            'tool_version': self.tool_version,
            'command': self.command,
            'spec_hash': self.spec_hash,
            'config': _plain(self.config_echo),
            'columns': list(self.columns),
            'log_columns': list(self.log_columns),
            'rows': rows,
            'pass_flags': _plain(self.pass_flags),
            'metadata': _plain(self.metadata),
        }

    @classmethod
    def from_dict(cls, data):
        try:
            columns = tuple(data['columns'])
            log_columns = tuple(data.get('log_columns', ()))
            log_indices = {columns.index(name) for name in log_columns}
            rows = tuple(
                tuple(_parse_cell(value, index in log_indices) for index, value in enumerate(row))
                for row in data['rows']
            )
            return cls(
                tool_version=data['tool_version'],
                command=data['command'],
                spec_hash=data['spec_hash'],
                config_echo=data.get('config', {}),
                columns=columns,
                rows=rows,
                pass_flags=data.get('pass_flags', {}),
                metadata=data.get('metadata', {}),
                log_columns=log_columns,
            )
        except (KeyError, TypeError, ValueError) as error:
            raise exceptions.SchemaMismatch('not a report envelope: {}'.format(error)) from error


def _plain(value, allow_neg_inf=False):
    """Convert numpy scalars and containers to JSON-ready builtins, checking that
    every float is finite.
    """
    if isinstance(value, dict):
        return {str(key): _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_plain(item) for item in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if value == -math.inf and allow_neg_inf:
            return NEG_INF_TOKEN
        if not math.isfinite(value):
            raise exceptions.NonFiniteValue('{!r} cannot be written to a report'.format(value))
    return value


def _parse_cell(value, allow_neg_inf):
    if allow_neg_inf and value == NEG_INF_TOKEN:
        return -math.inf
    return value


def _format_cell(value):
    if value is None:
        return ''
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return NEG_INF_TOKEN if value == -math.inf else FLOAT_FORMAT.format(value)
    return str(value)


def envelope_to_json(envelope: ReportEnvelope) -> str:
    return json.dumps(envelope.to_dict(), sort_keys=True, allow_nan=False, indent=2) + '\n'


def envelope_to_csv(envelope: ReportEnvelope) -> str:
    """Header plus one line per row. ``.`` decimals, no thousands separators."""
    data = envelope.to_dict()
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(data['columns'])
    for row in data['rows']:
        writer.writerow([_format_cell(value) for value in row])
    return buffer.getvalue()


def write_report(envelope: ReportEnvelope, output_dir) -> dict:
    """Write ``<command>.json`` and ``<command>.csv`` into ``output_dir``.

    :return: Mapping of media type to the path written.
    """
    os.makedirs(output_dir, exist_ok=True)
    paths = {}
    for media_type, extension, render in (
        ('application/json', 'json', envelope_to_json),
        ('text/csv', 'csv', envelope_to_csv),
    ):
        path = os.path.join(output_dir, '{}.{}'.format(envelope.command, extension))
        with open(path, 'w', newline='') as fp:
            fp.write(render(envelope))
        paths[media_type] = path
    logger.info('Wrote %s report to %s', envelope.command, output_dir)
    return paths


def load_report(path) -> ReportEnvelope:
    try:
        with open(path) as fp:
            data = json.load(fp)
    except json.JSONDecodeError as error:
        raise exceptions.SchemaMismatch('{}: {}'.format(path, error)) from error
    return ReportEnvelope.from_dict(data)


# ##### Comparison #####

@dataclass(frozen=True)
class ReportDiff:
    """Column-wise comparison of two reports of the same command.

    ``max_deviation`` maps each numeric column to the largest absolute difference
    over all rows; ``mismatched_cells`` counts non-numeric cells that differ.
    """
    command: str
    columns: tuple
    max_deviation: dict
    mismatched_cells: int
    pass_flags_differ: bool

    def within(self, tolerance=0.0):
        return (
            self.mismatched_cells == 0
            and all(value <= tolerance for value in self.max_deviation.values())
        )

    @property
    def identical(self):
        return self.within(0.0) and not self.pass_flags_differ


def _is_number(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _deviation(left, right):
    if left == right:
        return 0.0
    return abs(left - right)


def compare_reports(a, b) -> ReportDiff:
    """Field-wise numeric diff of two report files (or envelopes).

    :raises SchemaMismatch: Different commands, columns or row counts.
    """
    left = a if isinstance(a, ReportEnvelope) else load_report(a)
    right = b if isinstance(b, ReportEnvelope) else load_report(b)
    if left.command != right.command:
        raise exceptions.SchemaMismatch(
            'cannot compare {!r} with {!r} reports'.format(left.command, right.command))
    if left.columns != right.columns:
        raise exceptions.SchemaMismatch('column sets differ')
    if len(left.rows) != len(right.rows):
        raise exceptions.SchemaMismatch(
            'row counts differ: {} vs {}'.format(len(left.rows), len(right.rows)))
    deviation = {}
    mismatched = 0
    for left_row, right_row in zip(left.rows, right.rows):
        for column, x, y in zip(left.columns, left_row, right_row):
            if _is_number(x) and _is_number(y):
                deviation[column] = max(deviation.get(column, 0.0), _deviation(x, y))
            elif x != y:
                mismatched += 1
    return ReportDiff(
        command=left.command,
        columns=left.columns,
        max_deviation=deviation,
        mismatched_cells=mismatched,
        pass_flags_differ=left.pass_flags != right.pass_flags,
    )
