"""Tests for gpbound."""
