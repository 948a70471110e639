"""Tests package for qbailey."""
