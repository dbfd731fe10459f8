"""Tests for GitHub Researcher."""
