"""Tests for lac_risk."""
