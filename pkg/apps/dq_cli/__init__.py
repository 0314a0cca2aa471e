"""dq CLI: DFS and QECC verification, codewords, correction cycles and sweeps."""
