"""tabdistill: distill table-based chain-of-thought reasoning from a
teacher LLM into training data for small table-to-text models."""

__version__ = "0.1.0"
