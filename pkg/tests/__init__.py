"""Tests for the branched package."""
