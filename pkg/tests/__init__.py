"""Tests for rfdi."""
