# -*- coding: utf-8 -*-
import re
from setuptools import setup, find_packages

REQUIRES = [
    'numpy>=1.22',
    'scipy>=1.8',
    'numba>=0.56',
    'python-mimeparse',
]


def find_version(fname):
    """Attempts to find the version number in the file names fname.
    Raises RuntimeError if not found.
    """
    version = ''
    with open(fname, 'r') as fp:
        reg = re.compile(r'__version__ = [\'"]([^\'"]*)[\'"]')
        for line in fp:
            m = reg.match(line)
            if m:
                version = m.group(1)
                break
    if not version:
        raise RuntimeError('Cannot find version information')
    return version

__version__ = find_version('smb_lab/__init__.py')


def read(fname):
    with open(fname) as fp:
        content = fp.read()
    return content

setup(
    name='smb-lab',
    version=__version__,
    description='Exact and Monte Carlo statistics of stationary symbolic processes.',
    long_description=read('README.rst'),
    long_description_content_type='text/x-rst',
    packages=find_packages(exclude=("test*", "examples*")),
    include_package_data=True,
    install_requires=REQUIRES,
    python_requires='>=3.8',
    entry_points={
        'console_scripts': ['smb-lab=smb_lab.cli:main'],
    },
    license='MIT',
    zip_safe=False,
    keywords='entropy ergodic-theory markov-chains mixing information-theory',
    classifiers=[
        'Development Status :: 2 - Pre-Alpha',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: MIT License',
        'Natural Language :: English',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'Programming Language :: Python :: 3.11',
        'Topic :: Scientific/Engineering :: Mathematics',
    ],
    test_suite='tests'
)
