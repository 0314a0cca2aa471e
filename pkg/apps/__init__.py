"""DFS-QECC Simulation Lab - DFS, QECC and concatenated code simulation."""
