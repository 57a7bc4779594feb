"""Test suite for superadiabatic-lz."""
