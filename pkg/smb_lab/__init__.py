# -*- coding: utf-8 -*-
__version__ = '0.1.0'
__license__ = "MIT"

from .process import (  # noqa: E402
    Bernoulli,
    Markov,
    Word,
    cylinder_measure,
    load_spec,
    sample_trajectory,
    validate_spec,
)
from .runner import run  # noqa: E402

__all__ = (
    'Bernoulli',
    'Markov',
    'Word',
    'cylinder_measure',
    'load_spec',
    'sample_trajectory',
    'validate_spec',
    'run',
)
