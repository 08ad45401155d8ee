'''Staged lattice representations with forcing-style verification tooling.'''

__version__ = "0.1.0"
