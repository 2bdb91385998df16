"""Seeded random rational data.

Every random rational has numerator in [-3, 3] and denominator in {1, 2, 3},
drawn from ``random.Random(seed)``, so runs are reproducible.
"""
from __future__ import annotations

import random
from fractions import Fraction

from .connection import FrameJet
from .exact import PolyJet, RatMatrix, exponents_upto

__all__ = ["small_rational", "random_matrix", "random_frame_jet", "random_diffeo", "rng_for"]


def rng_for(seed) -> random.Random:
    return seed if isinstance(seed, random.Random) else random.Random(seed)


def small_rational(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(-3, 3), rng.choice((1, 2, 3)))


def random_matrix(n: int, rng: random.Random, invertible: bool = True) -> RatMatrix:
    while True:
        m = RatMatrix.from_rows([[small_rational(rng) for _ in range(n)] for _ in range(n)])
        if not invertible or m.det() != 0:
            return m


def random_frame_jet(n: int, order: int, seed, base: RatMatrix | None = None) -> FrameJet:
    """Random frame jet; ``base`` fixes the value at the origin (random invertible otherwise)."""
    rng = rng_for(seed)
    s0 = base if base is not None else random_matrix(n, rng)
    exps = [e for e in exponents_upto(n, order) if sum(e) >= 1]
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            coeffs = {e: small_rational(rng) for e in exps}
            coeffs[(0,) * n] = s0[i, j]
            row.append(PolyJet(n, order, coeffs))
        rows.append(tuple(row))
    return FrameJet(n, order, tuple(rows))


def random_diffeo(n: int, order: int, seed, linear: RatMatrix | None = None) -> list[PolyJet]:
    """Random origin-fixing map jet with invertible linear part."""
    rng = rng_for(seed)
    lin = linear if linear is not None else random_matrix(n, rng)
    exps = [e for e in exponents_upto(n, order) if sum(e) >= 2]
    out = []
    for k in range(n):
        coeffs = {e: small_rational(rng) for e in exps}
        for j in range(n):
            coeffs[tuple(int(h == j) for h in range(n))] = lin[k, j]
        out.append(PolyJet(n, order, coeffs))
    return out
