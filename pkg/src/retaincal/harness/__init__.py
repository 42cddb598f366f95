"""Experiment harness: ingestion, synthetic generators, sweeps, CLI."""
