"""Exact verification of pre-symplectic deformation identities.

The package is organized around the pipeline:

* :mod:`presymplectic.coeffring` -- exact coefficient rings on a chart;
* :mod:`presymplectic.cartan` -- sparse exterior calculus;
* :mod:`presymplectic.fiberlin` -- per-fiber skew linear algebra over Q;
* :mod:`presymplectic.koszul` -- the bivector-induced brackets, their
  homotopy structure maps, and the Maurer-Cartan residual;
* :mod:`presymplectic.presym` -- models (closed 2-form + splitting) and
  the exponential parametrization of nearby forms of equal rank;
* :mod:`presymplectic.foliation` -- the splitting-side brackets, the
  quotient morphism, and the obstruction certificates;
* :mod:`presymplectic.cli` -- scenario-driven verification front end.
"""

from .coeffring import (
    Chart,
    Coefficient,
    EvalError,
    ParseError,
    RingError,
    Scalar,
    coeff_parse,
    parse_angle,
)
from .cartan import (
    DifferentialForm,
    MultiVector,
    de_rham,
    iota,
    iota_form,
    lie,
    multi_sharp,
    schouten,
    sharp,
    wedge,
)

__all__ = [
    "Chart",
    "Coefficient",
    "Scalar",
    "RingError",
    "ParseError",
    "EvalError",
    "coeff_parse",
    "parse_angle",
    "DifferentialForm",
    "MultiVector",
    "wedge",
    "iota",
    "iota_form",
    "de_rham",
    "lie",
    "schouten",
    "sharp",
    "multi_sharp",
]

__version__ = "0.1.0"
