"""Tropical Torelli matrices and metric graph kernels."""
