"""Test suite for live-template-build project."""
