"""Exact computation in extended affine Weyl groups and affine Hecke algebras:
minimal-length conjugacy representatives, class polynomials, cocenter
reductions, parabolic (alcove) decompositions, Bernstein-presentation data,
and the combinatorial dimension/emptiness formulas they support."""

from .adlv import SigmaClassSpec, adlv_dimension, emptiness_check
from .bernstein import BernsteinDatum, bernstein_datum, embed_from_chamber, pair_equivalent
from .cocenter import Cocenter, PipelineError
from .conjugacy import ClassKey, ConjugacyLab, ReductionPath
from .engine import AffineEngine, AffineSubspace
from .hecke import HeckeAlgebra
from .laurent import Laurent, Xi
from .rootdata import KottwitzGroup, RootDatum, dominant_rep, load_datum, subdatum, validate

__all__ = [
    "AffineEngine",
    "AffineSubspace",
    "BernsteinDatum",
    "ClassKey",
    "Cocenter",
    "ConjugacyLab",
    "HeckeAlgebra",
    "KottwitzGroup",
    "Laurent",
    "PipelineError",
    "ReductionPath",
    "RootDatum",
    "SigmaClassSpec",
    "Xi",
    "adlv_dimension",
    "bernstein_datum",
    "dominant_rep",
    "embed_from_chamber",
    "emptiness_check",
    "load_datum",
    "pair_equivalent",
    "subdatum",
    "validate",
]
