"""Ensemble credit scoring."""
