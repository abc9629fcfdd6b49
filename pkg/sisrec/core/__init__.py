"""Sequences, shift-invariant subspaces and spectral primitives."""
