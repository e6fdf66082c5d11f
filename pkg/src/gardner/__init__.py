"""Rules engine, proof search and oracle verification for Gardner's 5x5 minichess."""

__version__ = "0.1.0"
