"""Bundled data: rotor table, mass budget, terrains, scenarios."""
