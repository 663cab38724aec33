"""Nahm sums: exact q-series, Nahm's equation, radial asymptotics and modularity scans."""
from .errors import *  # noqa: F401,F403
from .model import (CongruenceConstraint, NahmData, dual_data, load_nahm, nahm_from_json,
                    quadratic_form, strong_denominator, strong_denominator_strict, validate)

__version__ = "0.1.0"
