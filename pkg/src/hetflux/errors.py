"""Exception types shared across the package.

The CLI maps these onto exit codes: usage errors -> 1, ConfigError -> 2,
NumericalError -> 3, InvariantBreach -> 4.
"""


class HetfluxError(Exception):
    """Base class for package errors."""


class ConfigError(HetfluxError):
    """Invalid or inconsistent experiment configuration."""


class NumericalError(HetfluxError):
    """Numerical failure: root bracket/tolerance, CFL refusal, non-finite state."""


class InvariantBreach(HetfluxError):
    """A checked mathematical invariant failed beyond tolerance."""
