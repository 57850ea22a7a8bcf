"""Coordinate-level dynamics on bivector bundles.

The package provides, in rough dependency order:

* `wedgemech.geometry` - bivectors, momenta, fiber metrics and their pairings;
* `wedgemech.tulczyjew` - the canonical maps between phase prolongations and
  cotangent bundles, for curves and for surfaces;
* `wedgemech.fields` - Lagrangian and Hamiltonian fields (area functionals,
  their Morse family, quadratic curve Lagrangians) with derivative access;
* `wedgemech.variational` - sampled curves/surfaces and discrete
  Euler-Lagrange residuals;
* `wedgemech.constraints` - affine velocity constraints, annihilators, and
  d'Alembert-type force decompositions;
* `wedgemech.plateau` - Newton solvers for graph minimal surfaces, free and
  constrained;
* `wedgemech.cli` - the `wedgemech` command-line front end with
  deterministic text reports.
"""

__version__ = "0.1.0"
