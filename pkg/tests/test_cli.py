# -*- coding: utf-8 -*-
import io
import json
import math
import os

import pytest

from smb_lab import __version__
from smb_lab.cli import EXIT_COMPUTATION, EXIT_CONFIG, EXIT_FAILED, EXIT_OK, main

from tests.conftest import BERNOULLI_UNIFORM, SPEC_DIR


def invoke(*argv):
    stream = io.StringIO()
    code = main(list(argv), stream=stream)
    return code, stream.getvalue()


class TestRun:

    def test_passing_run(self, make_config):
        code, output = invoke('run', make_config('entropy', spec=BERNOULLI_UNIFORM))
        assert code == EXIT_OK
        assert json.loads(output)['metadata']['h'] == pytest.approx(math.log(2), abs=1e-15)

    def test_accept_from_config(self, make_config):
        path = make_config('mixing', parameters={'delta_grid': [0, 1]}, accept='text/csv')
        code, output = invoke('run', path)
        assert code == EXIT_OK
        assert output.splitlines()[0] == 'gap,beta,beta_bruteforce,psi_atom,phi_atom'

    def test_failed_check(self, make_config):
        path = make_config('smb-path', parameters={'length': 1000, 'paths': 1, 'tolerance': 0.0})
        assert invoke('run', path)[0] == EXIT_FAILED

    def test_computation_error(self, make_config):
        path = make_config('entropy', parameters={'n_grid': [8], 'budget': 10})
        assert invoke('run', path)[0] == EXIT_COMPUTATION

    @pytest.mark.parametrize('command, parameters', [
        ('clt', {'samples': 10}),
        ('entropy', {'n_max': 4}),
        ('mixing', {'delta_grid': []}),
        ('entropy', {'n_grid': []}),
    ])
    def test_config_errors(self, make_config, command, parameters):
        assert invoke('run', make_config(command, parameters=parameters))[0] == EXIT_CONFIG

    def test_missing_config(self, tmp_path):
        assert invoke('run', str(tmp_path / 'missing.json'))[0] == EXIT_CONFIG

    def test_overrides(self, make_config, tmp_path):
        path = make_config('entropy', parameters={'n_grid': [1, 2]})
        target = str(tmp_path / 'override')
        code, output = invoke('run', path, '--seed', '12', '--output-dir', target)
        assert code == EXIT_OK
        assert json.loads(output)['config']['seed'] == 12
        assert os.path.isfile(os.path.join(target, 'entropy.json'))

    def test_reruns_are_byte_identical_across_worker_counts(self, make_config, tmp_path,
                                                           monkeypatch):
        path = make_config('smb-path', seed=8, parameters={'length': 2000, 'paths': 6,
                                                           'tolerance': 1.0})
        contents = []
        for threads in ('1', '4', '8'):
            monkeypatch.setenv('SMB_LAB_THREADS', threads)
            target = str(tmp_path / 'threads-{}'.format(threads))
            assert invoke('run', path, '--output-dir', target)[0] == EXIT_OK
            with open(os.path.join(target, 'smb-path.json'), 'rb') as fp:
                contents.append(fp.read())
        assert contents[0] == contents[1] == contents[2]


class TestCompare:

    def test_closed_form_against_bruteforce(self, make_config, tmp_path):
        parameters = {'delta_grid': [0, 1, 2, 3, 4, 5, 6], 'n': 2, 'm': 2}
        closed = make_config('mixing', parameters=parameters,
                             output_dir=str(tmp_path / 'closed'))
        assert invoke('run', closed)[0] == EXIT_OK
        brute = make_config('mixing', parameters=dict(parameters, method='bruteforce'),
                            output_dir=str(tmp_path / 'brute'))
        assert invoke('run', brute)[0] == EXIT_OK
        code, output = invoke('compare', str(tmp_path / 'closed' / 'mixing.json'),
                              str(tmp_path / 'brute' / 'mixing.json'), '--tolerance', '1e-12')
        assert code == EXIT_OK
        assert json.loads(output)['max_deviation']['beta'] < 1e-12

    def test_different_reports(self, make_config, tmp_path):
        assert invoke('run', make_config('entropy', parameters={'n_grid': [1, 2]},
                                         output_dir=str(tmp_path / 'a')))[0] == EXIT_OK
        assert invoke('run', make_config('entropy', spec=BERNOULLI_UNIFORM,
                                         parameters={'n_grid': [1, 2]},
                                         output_dir=str(tmp_path / 'b')))[0] == EXIT_OK
        code, _ = invoke('compare', str(tmp_path / 'a' / 'entropy.json'),
                         str(tmp_path / 'b' / 'entropy.json'))
        assert code == EXIT_FAILED

    def test_schema_mismatch(self, make_config, tmp_path):
        invoke('run', make_config('entropy', parameters={'n_grid': [1]},
                                  output_dir=str(tmp_path / 'a')))
        invoke('run', make_config('mixing', parameters={'delta_grid': [1]},
                                  output_dir=str(tmp_path / 'b')))
        code, _ = invoke('compare', str(tmp_path / 'a' / 'entropy.json'),
                         str(tmp_path / 'b' / 'mixing.json'))
        assert code == EXIT_CONFIG


class TestValidate:

    def test_valid_spec(self):
        code, output = invoke('validate', os.path.join(SPEC_DIR, 'geometric.json'))
        assert code == EXIT_OK
        data = json.loads(output)
        assert data['alphabet_size'] == 30
        assert len(data['spec_hash']) == 64

    def test_invalid_spec(self, write_json):
        path = write_json('bad.json', {'type': 'markov', 'P': [[0.5, 0.6], [0.5, 0.5]]})
        assert invoke('validate', path)[0] == EXIT_CONFIG


def test_version(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(['--version'])
    assert excinfo.value.code == 0
    assert __version__ in capsys.readouterr().out
