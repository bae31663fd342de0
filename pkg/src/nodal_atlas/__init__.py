"""Critical points in nodal sets of Laplace eigenfunctions on model surfaces."""

__version__ = "0.1.0"
