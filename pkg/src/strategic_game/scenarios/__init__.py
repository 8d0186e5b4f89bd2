"""Scenario configs for the worked examples, loaded through importlib.resources."""
