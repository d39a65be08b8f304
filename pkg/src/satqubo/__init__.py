"""satqubo: 3-SAT to QUBO transformations, digital annealing, spectra."""

__version__ = "0.1.0"
