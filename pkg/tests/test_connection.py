from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from gmoduli.connection import (
    ConnectionJet, FrameJet, christoffels_from_frame, eta_from_frame, f_tensor_jet, flat_torsion,
    torsion_w_defect,
)
from gmoduli.exact import JetError, PolyJet, RatMatrix
from gmoduli.jets import g_action_on_slice
from gmoduli.lie import build_splitting, make_group, sample_group_elements
from gmoduli.moduli import f_r_map
from gmoduli.oracles import (
    bracket_constants_at_zero, closed_form_inv_delta, levi_civita_at_zero, web_connection_at_zero,
)
from gmoduli.sampling import random_frame_jet
from gmoduli.tensors import Tensor, TensorSpace, gl_action

GROUPS = ["o:2", "o:3", "product:1,2", "scalar:2", "scalar:3", "e:2"]
SPLITS = {s: build_splitting(make_group(s)) for s in GROUPS}


def at0(nested):
    return [[[p.constant_term() for p in row] for row in m] for m in nested]


def test_constant_frame_is_flat():
    s = FrameJet.constant(RatMatrix.from_rows([[2, 1], [0, 3]]), 2)
    sp = SPLITS["o:2"]
    assert all(p.is_zero() for m in flat_torsion(s) for row in m for p in row)
    assert christoffels_from_frame(s, sp).is_zero()
    assert all(p.is_zero() for m in f_tensor_jet(s, sp) for row in m for p in row)


def test_singular_frame_rejected():
    with pytest.raises(JetError):
        FrameJet.constant(RatMatrix.from_rows([[1, 2], [2, 4]]), 1)


def test_flat_torsion_hand_example():
    # sigma_11 = 1 + x^2: [X_1, X_2] = -d_1 at 0, so t^1_{12}(0) = 1
    x2 = PolyJet.variable(2, 1, 1)
    one, zero = PolyJet.constant(2, 1, 1), PolyJet.zero(2, 1)
    s = FrameJet(2, 1, ((one + x2, zero), (zero, one)))
    t = at0(flat_torsion(s))
    assert t[0][1][0] == 1 and t[1][0][0] == -1
    assert t[0][1][1] == 0


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([2, 3]))
def test_flat_torsion_is_minus_brackets(seed, n):
    s = random_frame_jet(n, 1, seed)
    c = bracket_constants_at_zero(s.sigma)
    assert at0(flat_torsion(s)) == [[[-x for x in row] for row in m] for m in c]


@pytest.mark.parametrize("spec", ["o:2", "o:3", "scalar:3", "product:1,2"])
def test_eta_closed_forms(spec):
    g = make_group(spec)
    sp = SPLITS[spec]
    for seed in range(3):
        s = random_frame_jet(g.n, 2, seed)
        t = flat_torsion(s)
        expect = closed_form_inv_delta(g.kind, g.n, t, g.blocks)
        eta = eta_from_frame(s, sp)
        zero = PolyJet.zero(g.n, 1)
        for a in range(g.n):
            for b in range(g.n):
                for c in range(g.n):
                    assert eta[a][b][c] == zero - expect[a][b][c]
        rows = [[[eta[i][j][k] for j in range(g.n)] for k in range(g.n)] for i in range(g.n)]
        for i in range(g.n):
            exps = {e for row in rows[i] for p in row for e in p.coeffs}
            for e in exps:
                assert g.in_span(RatMatrix.from_rows([[p.coeff(e) for p in row] for row in rows[i]]))


@pytest.mark.parametrize("spec", ["o:2", "o:3"])
def test_levi_civita(spec):
    sp = SPLITS[spec]
    n = sp.n
    for seed in range(5):
        s = random_frame_jet(n, 1, seed)
        assert christoffels_from_frame(s, sp).at_zero() == levi_civita_at_zero(s.sigma)


def test_koszul_orthonormal():
    sp = SPLITS["o:3"]
    for seed in range(3):
        s = random_frame_jet(3, 1, seed, base=RatMatrix.identity(3))
        c = bracket_constants_at_zero(s.sigma)
        eta = at0(eta_from_frame(s, sp))
        for i in range(3):
            for j in range(3):
                for k in range(3):
                    assert eta[i][j][k] == F(1, 2) * (c[i][j][k] + c[k][i][j] + c[k][j][i])


def test_web_closed_form():
    sp = SPLITS["scalar:3"]
    for seed in range(4):
        s = random_frame_jet(3, 1, seed)
        assert at0(eta_from_frame(s, sp)) == web_connection_at_zero(s.sigma)


@settings(max_examples=12, deadline=None)
@given(st.sampled_from(GROUPS), st.integers(0, 10**6))
def test_torsion_in_w(spec, seed):
    sp = SPLITS[spec]
    s = random_frame_jet(sp.n, 2, seed)
    conn = christoffels_from_frame(s, sp, check=False)
    assert conn.order == 1
    assert torsion_w_defect(s, sp, conn) == []


def test_fault_breaks_torsion_in_w():
    sp = SPLITS["o:2"]
    bad = sp.with_fault("a-sign")
    s = random_frame_jet(2, 1, 7)
    conn = christoffels_from_frame(s, bad, check=False)
    assert torsion_w_defect(s, bad, conn)
    assert conn.at_zero() != levi_civita_at_zero(s.sigma)


def test_order_one_dependence():
    sp = SPLITS["o:3"]
    s = random_frame_jet(3, 2, 11)
    bumped = FrameJet(3, 2, tuple(tuple(p + PolyJet.monomial(3, 2, (1, 1, 0), F(5, 2)) for p in row)
                                  for row in s.sigma))
    assert christoffels_from_frame(s, sp).at_zero() == christoffels_from_frame(bumped, sp).at_zero()


def test_f_two_paths():
    sp = SPLITS["o:2"]
    for seed in range(4):
        s = random_frame_jet(2, 1, seed)
        c = bracket_constants_at_zero(s.sigma)
        tt = Tensor.from_components(TensorSpace(2, 0, 2, 1), lambda _, cov, con: -c[cov[0]][cov[1]][con[0]])
        eta = -sp.tau_of(tt)
        expect = gl_action(s.at_zero(), eta)
        f = at0(f_tensor_jet(s, sp))
        got = Tensor.from_components(TensorSpace(2, 0, 2, 1), lambda _, cov, con: f[cov[0]][cov[1]][con[0]])
        assert got == expect


def test_e_structure_has_zero_f():
    sp = SPLITS["e:2"]
    s = random_frame_jet(2, 2, 3)
    assert all(p.is_zero() for m in f_tensor_jet(s, sp) for row in m for p in row)


@pytest.mark.parametrize("spec", ["o:2", "product:1,2", "scalar:2"])
def test_naturality_of_f(spec):
    sp = SPLITS[spec]
    n = sp.n
    for seed in range(2):
        s = random_frame_jet(n, 2, seed)
        for a in sample_group_elements(sp.g, 3):
            moved = g_action_on_slice(a, s, sp)
            for r in (0, 1):
                lhs = f_r_map(moved.truncate(r + 1), sp)
                rhs = gl_action(a.inverse(), f_r_map(s.truncate(r + 1), sp))
                assert lhs == rhs


def test_json_roundtrip():
    s = random_frame_jet(2, 2, 5)
    assert FrameJet.from_json(s.to_json()) == s
    conn = christoffels_from_frame(s, SPLITS["o:2"])
    assert ConnectionJet.from_json(conn.to_json()) == conn
