"""Tests for specband."""
