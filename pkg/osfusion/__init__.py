"""Order-statistics combiners for classifier ensembles."""

__version__ = "1.0.0"
