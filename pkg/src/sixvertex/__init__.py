"""Six-vertex model algebra in the F-basis, verified numerically."""

__version__ = "0.1.0"
