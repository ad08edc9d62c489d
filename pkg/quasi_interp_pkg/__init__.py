__all__ = [
    "errors",
    "config",
    "specfun",
    "symbol",
    "lagrange",
    "harness",
    "io",
    "utils",
    "runner",
]
# ^^ defines public API for `from quasi_interp_pkg import *`

__all__.append("execute_experiment")

from .runner import execute_experiment  # noqa: E402
