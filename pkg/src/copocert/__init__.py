"""Copositivity-based certificates of polynomial non-negativity."""
