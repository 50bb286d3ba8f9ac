"""
Core building blocks shared by every other package: numerics, the spatial
lattice, structural constraints, settings, errors and logging.
"""
