"""Amoebas, weighted compactified amoebas and their polyhedral limits."""
