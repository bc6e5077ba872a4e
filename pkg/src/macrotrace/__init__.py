"""macrotrace: reconstruct how macros spread through co-authorship networks
and measure what the inheritance structure predicts."""

__version__ = "0.1.0"
