"""satqubo-figures: plots for satqubo CSV outputs."""

__version__ = "0.1.0"
