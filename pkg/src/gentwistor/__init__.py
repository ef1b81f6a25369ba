"""Numerical verification of integrability criteria on generalized twistor
spaces of Riemannian 4-manifolds.

The package is organised bottom-up:

* bivector / gca: exact linear algebra of bivectors and generalized
  almost complex structures on V + V*.
* calculus: finite-difference Cartan calculus (Lie and Courant brackets,
  exterior derivative, Nijenhuis tensor of a structure field).
* metrics / riemann: metric catalog, orthonormal frames, Christoffel
  symbols, the curvature operator on bivectors and its self-dual /
  anti-self-dual block decomposition.
* dsl: a small expression language for user-supplied metrics.
* twistor / oracle: pointwise integrability residuals of the twistor
  structures, plus a slow fully numeric Nijenhuis cross-check.
* harness / cli: curvature classification, predictions, verdicts, and
  the command-line front end.
"""

__version__ = "0.1.0"
