"""Tests for the meta-learning pipeline."""
