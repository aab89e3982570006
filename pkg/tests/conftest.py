#!/usr/bin/env python
# -*- coding: utf-8 -*-
import json
import os

import pytest

from smb_lab import process

HERE = os.path.dirname(os.path.abspath(__file__))
CONFIG_DIR = os.path.join(os.path.dirname(HERE), 'configs')
SPEC_DIR = os.path.join(CONFIG_DIR, 'specs')

#: Two-state chain used throughout: p = (2/3, 1/3).
MARKOV_EXAMPLE = {'type': 'markov', 'P': [[0.9, 0.1], [0.2, 0.8]]}
MARKOV_THREE_STATE = {
    'type': 'markov',
    'P': [[0.5, 0.3, 0.2], [0.1, 0.6, 0.3], [0.4, 0.0, 0.6]],
}
BERNOULLI_QUARTER = {'type': 'bernoulli', 'weights': [0.25, 0.75]}
BERNOULLI_UNIFORM = {'type': 'bernoulli', 'weights': [0.5, 0.5]}

MARKOV_ENTROPY_RATE = 0.383523
BERNOULLI_QUARTER_ENTROPY_RATE = 0.562335
BERNOULLI_QUARTER_VARIANCE = 0.226303


def pytest_addoption(parser):
    parser.addoption('--slow', action='store_true', default=False,
                     help='run acceptance-scale Monte Carlo tests')


def pytest_collection_modifyitems(config, items):
    if config.getoption('--slow'):
        return
    skip = pytest.mark.skip(reason='needs --slow')
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip)


@pytest.fixture(scope='session')
def markov_example():
    return process.validate_spec(MARKOV_EXAMPLE)


@pytest.fixture(scope='session')
def markov_three_state():
    return process.validate_spec(MARKOV_THREE_STATE)


@pytest.fixture(scope='session')
def bernoulli_quarter():
    return process.validate_spec(BERNOULLI_QUARTER)


@pytest.fixture(scope='session')
def bernoulli_uniform():
    return process.validate_spec(BERNOULLI_UNIFORM)


@pytest.fixture(params=['markov_example', 'markov_three_state', 'bernoulli_quarter'])
def any_spec(request):
    return request.getfixturevalue(request.param)


def near_uniform_chain(k):
    """Irreducible, aperiodic chain on ``k`` states whose entries are all close to
    ``1/k``, so every atom is small.
    """
    rows = []
    for i in range(k):
        row = [1.0 / k] * k
        row[i] += 0.2 / k
        row[(i + 1) % k] -= 0.2 / k
        rows.append(row)
    return process.validate_spec({'type': 'markov', 'P': rows}, recompute_stationary=True)


@pytest.fixture()
def write_json(tmp_path):
    def maker(name, data):
        path = tmp_path / name
        path.write_text(json.dumps(data))
        return str(path)
    return maker


@pytest.fixture()
def make_config(tmp_path, write_json):
    """Write a spec and a config pointing at it; returns the config path."""
    def maker(command, spec=MARKOV_EXAMPLE, seed=0, parameters=None, **extra):
        write_json('spec.json', spec)
        data = {
            'spec_path': 'spec.json',
            'command': command,
            'seed': seed,
            'output_dir': str(tmp_path / 'out'),
            'parameters': parameters or {},
        }
        data.update(extra)
        return write_json('{}.json'.format(command), data)
    return maker
