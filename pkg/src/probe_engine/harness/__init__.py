"""Configuration, sweeps, figure datasets and the command-line interface."""
