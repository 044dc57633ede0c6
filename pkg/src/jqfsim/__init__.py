"""Open-system simulation of a transmon data qubit protected by a Josephson quantum filter."""
__version__ = "0.1.0"
