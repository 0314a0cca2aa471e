"""Test suite for the DFS-QECC Simulation Lab."""
