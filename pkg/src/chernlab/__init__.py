"""Numerical laboratory for Chern-connection tensor calculus on Hermitian manifolds."""
