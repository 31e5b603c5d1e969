"""Tests for the steklov_windows package."""
