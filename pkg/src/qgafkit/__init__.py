"""Classical and quantum-simulated Gramian angular field images for return forecasting."""

__version__ = "0.1.0"
