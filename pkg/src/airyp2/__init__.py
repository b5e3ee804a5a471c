"""Airy solutions of Painleve II, cubic-ensemble Hankel determinants, and
the one-cut / two-cut / trefoil phase diagram."""

from .airy import ComplexJet, SeedWeights, airy_pair, airy_pair_scaled, seed_jet
from .scaledc import ScaledComplex

__all__ = [
    "ComplexJet",
    "ScaledComplex",
    "SeedWeights",
    "airy_pair",
    "airy_pair_scaled",
    "seed_jet",
]
