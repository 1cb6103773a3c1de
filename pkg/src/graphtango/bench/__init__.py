"""Benchmark harness: dataset loading and generation, batched experiment
driver, report emission, and the command-line entry point."""
