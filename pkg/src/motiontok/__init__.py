"""Multi-scale motion tokenization: quantized codecs, masked generation, evaluation."""

__version__ = "0.1.0"
