"""Figure rendering for spectral-lab CSV artifacts."""

__version__ = "0.1.0"
