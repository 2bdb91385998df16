import itertools
from fractions import Fraction as F
from math import comb

import pytest
from hypothesis import given, settings, strategies as st

from gmoduli.connection import FrameJet
from gmoduli.exact import PolyJet, RatMatrix, solve_linear
from gmoduli.jets import FramedJet, g_action_on_slice, normalize, parallel_frame, s_r_membership
from gmoduli.lie import build_splitting, make_group, sample_group_elements
from gmoduli.moduli import (
    ModuliError, epstein_dim, epstein_injection, f_r_map, frame_with_top, l_apply, l_operator, lift_section,
    moduli_table, q_r_eval, reassemble, sigma_r, split_jet, sym_matrix, w_module, w_module_specialized,
    z_splitting_check,
)
from gmoduli.oracles import hook_content_dim
from gmoduli.sampling import random_frame_jet
from gmoduli.tensors import Tensor, TensorSpace, gl_action, linear_map_matrix, spencer_delta, sym_rpq

from conftest import ROT345

CATALOGUE = ["o:2", "o:3", "product:1,2", "scalar:2", "scalar:3", "e:2"]
SPLITS = {s: build_splitting(make_group(s)) for s in CATALOGUE}


def rand_tensor(space, seed):
    import random
    rng = random.Random(seed)
    return Tensor.from_vector(space, [F(rng.randint(-3, 3), rng.choice((1, 2, 3))) for _ in range(space.dim)])


def slice_jet(spec, order, seed):
    sp = SPLITS[spec]
    s = random_frame_jet(sp.n, order, seed)
    return parallel_frame(normalize(FramedJet(s, s.at_zero()), sp)[0], sp)


# ---- Sigma^(r) -----------------------------------------------------------

def test_sigma_r_examples():
    assert sigma_r(FrameJet.identity(2, 2)).is_zero()
    one, zero = PolyJet.constant(2, 1, 1), PolyJet.zero(2, 1)
    s = FrameJet(2, 1, ((one, zero), (PolyJet.variable(2, 1, 0), one)))
    t = sigma_r(s)
    assert t.entries == {((0,), (0,), (1,)): F(1)}
    assert t.component((0,), (0,), (1,)) == 1
    with pytest.raises(ModuliError):
        sigma_r(FrameJet.identity(2, 0))


def test_frame_with_top_roundtrip():
    s = random_frame_jet(2, 1, 3)
    top = rand_tensor(TensorSpace(2, 2, 1, 1), 4)
    ext = frame_with_top(s, top)
    assert sigma_r(ext) == top and ext.truncate(1) == s


# ---- L^(r) and sym -------------------------------------------------------

@pytest.mark.parametrize("n,r,p,q", [(2, 0, 2, 1), (2, 1, 1, 1), (3, 1, 2, 1), (2, 2, 1, 1)])
def test_sparse_sym_matches_generic(n, r, p, q):
    dom = TensorSpace(n, r, p, q)
    assert sym_matrix(n, r, p, q) == linear_map_matrix(sym_rpq, dom)


def generic_l(t, split):
    n, r = split.n, t.space.r - 1
    d = spencer_delta(t, 2)
    out = {}
    for s in itertools.combinations_with_replacement(range(n), r):
        tt = Tensor.from_components(TensorSpace(n, 0, 2, 1), lambda _, c, k: d.component(s, c, k))
        tau = split.tau_of(tt)
        for a in range(n):
            for b in range(n):
                for g in range(n):
                    out[(s, a, b, g)] = tau.component((), (a, b), (g,))
    return Tensor.from_components(TensorSpace(n, r, 2, 1), lambda s, c, k: out[(s, c[0], c[1], k[0])])


@pytest.mark.parametrize("spec", CATALOGUE)
@pytest.mark.parametrize("r", [0, 1])
def test_sparse_l_matches_generic(spec, r):
    sp = SPLITS[spec]
    t = rand_tensor(TensorSpace(sp.n, r + 1, 1, 1), r)
    assert l_apply(t, sp) == generic_l(t, sp)


def test_l_zero_for_trivial_group():
    assert l_operator(1, SPLITS["e:2"]).is_zero()


def _closed_l(kind, n, blocks, tc, S, a, b, k):
    blk = (lambda i: int(i >= blocks[0])) if blocks else (lambda i: 0)
    if kind == "scalar":
        return F(int(k == b), n - 1) * sum(tc(j, S + (a,), j) - tc(j, S + (j,), a) for j in range(n))
    if kind == "product" and blk(b) != blk(k):
        return F(0)
    if kind == "product" and blk(a) != blk(b):
        return F(1, 2) * (tc(k, S + (a,), b) - tc(k, S + (b,), a) - tc(b, S + (a,), k) + tc(b, S + (k,), a))
    return F(1, 2) * (tc(k, S + (a,), b) - tc(k, S + (b,), a) + tc(b, S + (k,), a) - tc(b, S + (a,), k)
                      + tc(a, S + (k,), b) - tc(a, S + (b,), k))


@pytest.mark.parametrize("spec", ["o:2", "o:3", "scalar:2", "scalar:3", "product:1,2", "product:2,1"])
@pytest.mark.parametrize("r", [0, 1])
def test_l_closed_forms(spec, r):
    g = make_group(spec)
    sp = SPLITS.get(spec) or build_splitting(g)
    n = g.n
    t = rand_tensor(TensorSpace(n, r + 1, 1, 1), 7 + r)
    lt = l_apply(t, sp)

    def tc(k, s, j):
        return t.component(tuple(sorted(s)), (j,), (k,))

    for s in itertools.product(range(n), repeat=r):
        for a, b, k in itertools.product(range(n), repeat=3):
            assert lt.component(tuple(sorted(s)), (a, b), (k,)) == _closed_l(g.kind, n, g.blocks, tc, s, a, b, k)


@pytest.mark.parametrize("spec", ["o:2", "product:1,2", "scalar:2"])
def test_l_equivariant(spec):
    sp = SPLITS[spec]
    t = rand_tensor(TensorSpace(sp.n, 2, 1, 1), 9)
    for a in sample_group_elements(sp.g, 4) + ([ROT345] if spec == "o:2" else []):
        assert l_apply(gl_action(a, t), sp) == gl_action(a, l_apply(t, sp))


# ---- F^(r), Q^(r) and the decomposition ---------------------------------------

def test_f_r_trivial_cases():
    assert f_r_map(FrameJet.identity(2, 2), SPLITS["o:2"]).is_zero()
    assert f_r_map(random_frame_jet(2, 2, 1), SPLITS["e:2"]).is_zero()
    assert q_r_eval(FrameJet.identity(3, 1), SPLITS["o:3"]).is_zero()
    assert q_r_eval(random_frame_jet(2, 0, 5), SPLITS["o:2"]).is_zero()


@settings(max_examples=15, deadline=None)
@given(st.sampled_from(CATALOGUE), st.integers(0, 2), st.integers(0, 10**6))
def test_decomposition(spec, r, seed):
    sp = SPLITS[spec]
    s = random_frame_jet(sp.n, r + 1, seed, base=RatMatrix.identity(sp.n))
    lhs = f_r_map(s, sp)
    rhs = l_apply(sigma_r(s), sp) + q_r_eval(s.truncate(r), sp)
    assert lhs == rhs


def test_decomposition_residual_ignores_top():
    sp = SPLITS["o:3"]
    low = random_frame_jet(3, 1, 2, base=RatMatrix.identity(3))
    res = set()
    for seed in range(3):
        hi = frame_with_top(low, rand_tensor(TensorSpace(3, 2, 1, 1), seed))
        res.add(f_r_map(hi, sp) - l_apply(sigma_r(hi), sp))
    assert len(res) == 1


# ---- W^k -----------------------------------------------------------------

@pytest.mark.parametrize("n,k,dim", [(2, 2, 1), (4, 2, 20), (2, 3, 2), (3, 2, 6), (3, 3, 15)])
def test_epstein_dim(n, k, dim):
    assert epstein_dim(n, k) == dim
    assert epstein_dim(n, 1) == 0


def test_epstein_matches_square_formula():
    for n in (2, 3, 4, 5):
        assert epstein_dim(n, 2) == n * n * (n * n - 1) // 12


def test_hook_content_small():
    assert hook_content_dim(3, (1,)) == 3
    assert hook_content_dim(3, (2,)) == 6
    assert hook_content_dim(3, (1, 1)) == 3
    assert hook_content_dim(2, (1, 1, 1)) == 0


@pytest.mark.parametrize("n,k", [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (3, 3)])
def test_orthogonal_w_matches_epstein(n, k):
    assert w_module(k, SPLITS[f"o:{n}"]).dim == epstein_dim(n, k)


def test_w_dim_o4():
    sp = build_splitting(make_group("o:4"))
    assert w_module(1, sp).dim == 0
    assert w_module(2, sp).dim == 20


@pytest.mark.parametrize("k", [1, 2, 3])
def test_trivial_group_w_is_kernel_of_sym(k):
    n, r = 2, k - 1
    expect = n * (n * comb(n + r, r + 1) - comb(n + r + 1, r + 2))
    assert w_module(k, SPLITS["e:2"]).dim == expect
    if k == 1:
        assert expect == 2


def test_scalar3_w1():
    assert w_module(1, SPLITS["scalar:3"]).dim == 6


@pytest.mark.parametrize("spec", ["o:2", "o:3", "scalar:2", "scalar:3", "e:2"])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_specialized_equations_match(spec, k):
    sp = SPLITS[spec]
    assert w_module(k, sp).same_span(w_module_specialized(sp.g, k))


def test_product_specialized_equations_diverge_on_mixed_blocks():
    # Known discrepancy: the closed-form system for product groups imposes the
    # index swap for every symmetric multi-index, while the kernel only obeys it
    # when the multi-index lies in one block.  Dimensions still agree.
    sp = SPLITS["product:1,2"]
    w, ws = w_module(2, sp), w_module_specialized(sp.g, 2)
    assert w.dim == ws.dim == 18
    assert not w.same_span(ws)
    amb = TensorSpace(3, 2, 1, 1)
    blk = lambda i: int(i >= 1)
    for s in itertools.combinations_with_replacement(range(3), 2):
        holds = all(v.component(s, (j,), (m,)) == v.component(s, (m,), (j,))
                    for v in w.vectors for j in range(3) for m in range(3) if blk(j) == blk(m))
        assert holds == (blk(s[0]) == blk(s[1])), s


def test_w1_is_kernel_of_projection():
    # order one: the module is the supplement itself
    for spec in CATALOGUE:
        sp = SPLITS[spec]
        assert w_module(1, sp).dim == sp.W_basis.dim


@pytest.mark.parametrize("spec", ["o:2", "product:1,2", "scalar:2"])
def test_w_invariant(spec):
    sp = SPLITS[spec]
    w = w_module(2, sp)
    for a in sample_group_elements(sp.g):
        assert w.check_invariance("g", lambda t: gl_action(a, t))


def test_epstein_injection():
    for n, k in [(2, 2), (3, 2), (2, 3)]:
        inj = epstein_injection(n, k)
        assert inj.rank() == inj.ncols
        w = w_module(k, SPLITS[f"o:{n}"])
        pre = [solve_linear(inj, list(v.to_vector())) for v in w.vectors]
        assert all(x is not None for x in pre)
        assert RatMatrix.from_columns(pre, inj.ncols).rank() == epstein_dim(n, k)
        tails = list(itertools.combinations_with_replacement(range(n), k))
        col = {(j, m, s): c for c, (j, m, s) in enumerate(itertools.product(range(n), range(n), tails))}
        for x in pre:
            for (j, m, s), c in col.items():
                assert x[c] == x[col[(m, j, s)]]


# ---- splitting and section -----------------------------------------------------

@pytest.mark.parametrize("spec", CATALOGUE)
@pytest.mark.parametrize("k", [1, 2, 3])
def test_z_splitting(spec, k):
    rep = z_splitting_check(k, SPLITS[spec])
    assert rep.ok, rep.to_json()


def test_z_trivial_group():
    rep = z_splitting_check(2, SPLITS["e:2"])
    assert rep.dim_z == 0 and rep.dim_w == rep.dim_vbar


def test_lift_of_flat_is_flat():
    for spec in CATALOGUE:
        n = SPLITS[spec].n
        assert lift_section(FrameJet.identity(n, 1), SPLITS[spec]) == FrameJet.identity(n, 2)


@pytest.mark.parametrize("spec", ["o:2", "scalar:2", "product:1,2", "e:2"])
def test_lift_and_split(spec):
    sp = SPLITS[spec]
    for seed in range(2):
        low = slice_jet(spec, 1, seed)
        up = lift_section(low, sp)
        assert up.truncate(1) == low
        assert s_r_membership(up, sp).ok
        l2, c2 = split_jet(up, sp)
        assert l2 == low and c2.is_zero()
        full = slice_jet(spec, 2, seed)
        l3, c3 = split_jet(full, sp)
        assert w_module(2, sp).contains(c3)
        assert reassemble(l3, c3, sp) == full


def test_split_flat():
    low, comp = split_jet(FrameJet.identity(2, 2), SPLITS["o:2"])
    assert low == FrameJet.identity(2, 1) and comp.is_zero()


def test_lift_rejects_non_slice():
    s = random_frame_jet(2, 1, 1)
    with pytest.raises(ModuliError):
        lift_section(s, SPLITS["o:2"])


@pytest.mark.parametrize("spec", ["o:2", "scalar:2", "product:1,2"])
def test_section_equivariance(spec):
    sp = SPLITS[spec]
    low = slice_jet(spec, 1, 8)
    full = slice_jet(spec, 2, 8)
    elems = sample_group_elements(sp.g, 3) + ([ROT345] if spec == "o:2" else [])
    for a in elems:
        assert lift_section(g_action_on_slice(a, low, sp), sp) == g_action_on_slice(a, lift_section(low, sp), sp)
        _, c = split_jet(full, sp)
        _, ca = split_jet(g_action_on_slice(a, full, sp), sp)
        assert ca == gl_action(a.inverse(), c)


# ---- tables --------------------------------------------------------------

def test_table_o2():
    t = moduli_table("o:2", 2)
    assert t.to_csv() == "1,0,0\n2,1,1"
    assert t.ok


def test_table_trivial_and_scalar():
    assert moduli_table("e:2", 1).to_csv() == "1,2,2"
    assert moduli_table("scalar:3", 1).to_csv() == "1,6,6"


def test_table_prefix_sums():
    t = moduli_table("scalar:2", 3)
    total = 0
    for row in t.rows:
        total += row.dim_w
        assert row.dim_s == total


def test_table_rejects_nonzero_prolongation():
    with pytest.raises(ModuliError):
        moduli_table("gl:2", 1)


def test_table_flags_product_mismatch():
    t = moduli_table("product:1,2", 2)
    assert [r.specialized_match for r in t.rows] == [True, False]
    assert not t.ok
    assert "MISMATCH" in t.to_text()
