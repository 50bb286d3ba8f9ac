"""
seRNN Lab backend.

Numerics, network models, training, metrics and the sweep harness.
"""
