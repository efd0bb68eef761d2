"""Dual curvature measures, moment integrals and subspace concentration of convex bodies."""
__version__ = "0.1.0"
