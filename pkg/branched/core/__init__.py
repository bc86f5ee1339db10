"""Numerical core: special functions, the branched model and its solvers."""
