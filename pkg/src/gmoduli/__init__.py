"""Exact jet calculus for G-structures with canonical linear connection."""
from .exact import JetError, PolyJet, RatMatrix, rref_kernel, solve_linear
from .lie import CanonicalSplitting, LieSubalgebra, build_splitting, first_prolongation, make_group, trace_supplement
from .tensors import SubspaceBasis, Tensor, TensorSpace

__version__ = "0.1.0"
