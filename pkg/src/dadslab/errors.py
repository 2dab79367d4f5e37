"""Error types shared across the package.

Two failure families are kept apart on purpose: configuration problems
(bad dimensions, unknown identifiers, invalid parameter ranges) abort a run
before any numerics happen, while numeric faults (non-finite values popping
up mid-computation) carry the offending time/state so the caller can report
where the integration went bad.
"""

from __future__ import annotations


class ConfigurationError(ValueError):
    """Invalid setup: dimension mismatch, unknown name, bad parameter range."""


class NumericFault(ArithmeticError):
    """A computation produced a non-finite value.

    Attributes t and state locate the fault when it happened inside an
    integration; both are None for pointwise evaluator faults.
    """

    def __init__(self, message, t=None, state=None):
        super().__init__(message)
        self.t = t
        self.state = state
