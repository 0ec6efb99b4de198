"""Liouville equation laboratory."""
