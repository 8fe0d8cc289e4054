"""Round-based simulator of channel selection for multi-hop cognitive radio broadcast."""

__version__ = "0.1.0"
