"""Grid-based laboratory for bilinear spherical averaging operators.

Modules:
  exponents   exact exponent arithmetic and admissible-region geometry
  grid        cell-centered grid functions and test-function sampling
  dyadic      dyadic lattices, stopping-time cubes, sparse families
  spherical   spherical averages and maximal operators
  weights     weight-class membership and numeric characteristics
  experiments scaling runs, probes, and consistency reports
  cli         command-line entry point
  kernels     compiled/fallback interpolation cores
"""

from .kernels import backend_name

__all__ = ["backend_name"]
__version__ = "0.1.0"
