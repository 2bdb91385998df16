"""Independent closed-form and brute-force oracles.

None of these route through the splitting or the general kernel machinery;
tests and ``verify`` compare them against the main code paths.
"""
from __future__ import annotations

from fractions import Fraction
from math import prod

from .exact import PolyJet, RatMatrix, jet_matmul, jet_matrix_inverse

__all__ = [
    "closed_form_inv_delta",
    "closed_form_inv_delta_matrix",
    "levi_civita_at_zero",
    "bracket_constants_at_zero",
    "web_connection_at_zero",
    "ray_parallel_frame",
    "hook_content_dim",
]


def _block(i: int, blocks: tuple[int, ...]) -> int:
    return 0 if i < blocks[0] else 1


def closed_form_inv_delta(kind: str, n: int, T, blocks: tuple[int, ...] = ()):
    """``tau^k_{ij}`` from ``T[i][j][k] = T^k_{ij}`` by the catalogue formulas."""
    tau = [[[Fraction(0)] * n for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            for k in range(n):
                if kind == "o":
                    v = Fraction(1, 2) * (T[i][j][k] + T[k][i][j] + T[k][j][i])
                elif kind == "scalar":
                    v = Fraction(int(j == k), n - 1) * sum(T[i][l][l] for l in range(n))
                elif kind == "product":
                    bi, bj, bk = (_block(x, blocks) for x in (i, j, k))
                    if bj != bk:
                        v = Fraction(0)
                    elif bi == bj:
                        v = Fraction(1, 2) * (T[i][j][k] + T[k][i][j] + T[k][j][i])
                    else:
                        v = Fraction(1, 2) * (T[i][j][k] - T[i][k][j])
                elif kind == "e":
                    v = Fraction(0)
                else:
                    raise ValueError(f"no closed form for {kind!r}")
                tau[i][j][k] = v
    return tau


def closed_form_inv_delta_matrix(kind: str, n: int, blocks: tuple[int, ...] = ()) -> RatMatrix:
    """Closed form as a matrix from wedge2 coordinates to ``V^{0,2}_1`` components."""
    from .tensors import TensorSpace, wedge2_keys
    keys = wedge2_keys(n)
    sp = TensorSpace(n, 0, 2, 1)
    cols = []
    for (a, b, c) in keys:
        T = [[[Fraction(0)] * n for _ in range(n)] for _ in range(n)]
        T[a][b][c] = Fraction(1)
        T[b][a][c] = Fraction(-1)
        tau = closed_form_inv_delta(kind, n, T, blocks)
        cols.append([tau[i][j][k] for (_, (i, j), (k,)) in sp.keys])
    return RatMatrix.from_columns(cols, sp.dim)


def _d0(p: PolyJet, i: int) -> Fraction:
    return p.deriv(i).constant_term()


def levi_civita_at_zero(sigma) -> list[list[list[Fraction]]]:
    """``Gamma^k_{ij}(0)`` of the metric ``g = (sigma sigma^T)^{-1}``; returns ``G[i][j][k]``."""
    n = len(sigma)
    st = [[sigma[j][i] for j in range(n)] for i in range(n)]
    g = jet_matrix_inverse(jet_matmul(sigma, st))
    g0 = RatMatrix.from_rows([[g[i][j].constant_term() for j in range(n)] for i in range(n)])
    ginv = g0.inverse()
    dg = [[[_d0(g[i][j], h) for h in range(n)] for j in range(n)] for i in range(n)]
    out = [[[Fraction(0)] * n for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            for k in range(n):
                out[i][j][k] = Fraction(1, 2) * sum(
                    ginv[k, l] * (dg[j][l][i] + dg[i][l][j] - dg[i][j][l]) for l in range(n))
    return out


def bracket_constants_at_zero(sigma) -> list[list[list[Fraction]]]:
    """``C^k_{ij}`` with ``[X_i, X_j](0) = sum_k C^k_{ij} X_k(0)``; columns of sigma are the X_i."""
    n = len(sigma)
    s0 = RatMatrix.from_rows([[sigma[a][b].constant_term() for b in range(n)] for a in range(n)])
    s0inv = s0.inverse()
    out = [[[Fraction(0)] * n for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            br = [sum(s0[h, i] * _d0(sigma[l][j], h) - s0[h, j] * _d0(sigma[l][i], h) for h in range(n))
                  for l in range(n)]
            for k in range(n):
                out[i][j][k] = sum(s0inv[k, l] * br[l] for l in range(n))
    return out


def web_connection_at_zero(sigma) -> list[list[list[Fraction]]]:
    """Frame components ``eta^g_{ij}`` of the scalar-structure connection at 0."""
    n = len(sigma)
    c = bracket_constants_at_zero(sigma)
    return [[[Fraction(int(g == j), n - 1) * sum(c[i][k][k] for k in range(n)) for g in range(n)]
             for j in range(n)] for i in range(n)]


def ray_parallel_frame(gamma, lam: tuple[Fraction, ...], order: int) -> list[list[list[Fraction]]]:
    """Taylor coefficients in ``t`` of the frame parallel along ``x = t*lam``.

    ``gamma[i][j][k]`` is a PolyJet for ``Gamma^k_{ij}``.  Solves
    ``d/dt s_{gi} = -sum lam^j Gamma^g_{j a}(t lam) s_{ai}``, ``s(0) = I``
    as a univariate power series; returns ``c[m][g][i]`` for ``m <= order``.
    """
    n = len(lam)
    # restrict Gamma to the ray: coefficient of t^m is sum over |exp| = m of coeff * lam^exp
    def ray(p: PolyJet) -> list[Fraction]:
        out = [Fraction(0)] * (order + 1)
        for exp, v in p.items():
            d = sum(exp)
            if d <= order:
                out[d] += v * prod(lam[h] ** e for h, e in enumerate(exp))
        return out

    gr = [[[ray(gamma[i][j][k]) for k in range(n)] for j in range(n)] for i in range(n)]
    c = [[[Fraction(int(g == i)) for i in range(n)] for g in range(n)]]
    for m in range(order):
        nxt = [[Fraction(0)] * n for _ in range(n)]
        for g in range(n):
            for i in range(n):
                acc = Fraction(0)
                for j in range(n):
                    if not lam[j]:
                        continue
                    for a in range(n):
                        acc += lam[j] * sum(gr[j][a][g][p] * c[m - p][a][i] for p in range(m + 1))
                nxt[g][i] = -acc / (m + 1)
        c.append(nxt)
    return c


def hook_content_dim(n: int, shape: tuple[int, ...]) -> int:
    """Dimension of the GL(n) Schur module of a partition via the hook-content formula."""
    cells = [(i, j) for i, row in enumerate(shape) for j in range(row)]
    conj = [sum(1 for row in shape if row > j) for j in range(shape[0])] if shape else []
    num = 1
    den = 1
    for i, j in cells:
        num *= n + j - i
        den *= (shape[i] - j - 1) + (conj[j] - i - 1) + 1
    return num // den if num > 0 else 0

