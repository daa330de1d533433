"""Python bindings for the senti-levy jump prediction core."""

try:
    from senti_levy._senti_levy import *  # noqa: F401,F403
except ImportError:  # in-tree builds put the module next to this package
    from _senti_levy import *  # noqa: F401,F403
