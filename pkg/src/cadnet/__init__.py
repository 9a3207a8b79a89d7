"""Context-aware oriented-object detection toolkit."""

__version__ = "0.1.0"
