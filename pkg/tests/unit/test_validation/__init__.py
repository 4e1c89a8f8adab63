"""Validation unit tests."""
