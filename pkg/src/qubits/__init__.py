"""
qubits - balanced time-series clustering as a QUBO problem
"""

__version__ = "1.0.0"
