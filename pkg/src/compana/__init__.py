"""Exact computable analysis: computable reals, effective Banach spaces and operators."""

__version__ = "0.1.0"
