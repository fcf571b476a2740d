"""Memory and non-Markovianity of an open qubit in a structured bosonic bath."""

__version__ = "0.1.0"
