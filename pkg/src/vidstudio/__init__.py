"""vidstudio: a desk-scale studio turning sentences into narrated videos."""

__version__ = "0.1.0"
