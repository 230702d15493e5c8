"""Experiment configuration, commands and command-line entry points."""
