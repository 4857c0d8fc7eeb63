"""Discrete-event simulator: scheduler, channel, mobility, nodes and runs."""
