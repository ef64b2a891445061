"""Extreme ratios between spectral and Frobenius norms of tensors."""

__version__ = "1.0.0"
