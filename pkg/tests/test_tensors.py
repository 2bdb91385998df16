import itertools
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from conftest import ROT345, rationals
from gmoduli.exact import RatMatrix
from gmoduli.lie import make_group
from gmoduli.tensors import (
    Tensor, TensorError, TensorSpace, alternation_delta, basis_enumerate, cyclic_sum, gl_action,
    linear_map_matrix, spencer_delta, sym_rpq,
)


def random_tensor(draw, space):
    return Tensor.from_vector(space, [draw(rationals) for _ in range(space.dim)])


def test_basis_enumerate_counts():
    assert basis_enumerate(TensorSpace(2, 0, 0, 1)) == [((), (), (0,)), ((), (), (1,))]
    assert len(basis_enumerate(TensorSpace(2, 1, 1, 1))) == 8
    assert len(basis_enumerate(TensorSpace(3, 2))) == 6
    assert TensorSpace(3, 2, 1, 1).dim == len(TensorSpace(3, 2, 1, 1).keys)


def test_array_roundtrip_and_json():
    sp = TensorSpace(2, 2, 1, 1)
    t = Tensor.from_vector(sp, range(1, sp.dim + 1))
    assert Tensor.from_array(sp, t.to_array()) == t
    assert Tensor.from_json(t.to_json()) == t
    assert t.to_json()["entries"][0]["val"] == "1"


def test_sym_examples():
    sp = TensorSpace(2, 1, 1, 1)
    t = Tensor(sp, {((0,), (1,), (0,)): 1})
    s = sym_rpq(t)
    assert s.space == TensorSpace(2, 2, 0, 1)
    assert s.entries == {((0, 1), (), (0,)): 1}
    anti = t - Tensor(sp, {((1,), (0,), (0,)): 1})
    assert sym_rpq(anti).is_zero()
    with pytest.raises(TensorError):
        sym_rpq(Tensor.zero(TensorSpace(2, 1, 0, 1)))


def test_sym_identity_on_symmetric():
    # re-house a symmetric element of S^2 (x) V as V^{1,1}_1 and symmetrize back
    sym = Tensor.from_vector(TensorSpace(2, 2, 0, 1), [1, F(1, 2), -3, 2, 0, 5])
    arr = sym.to_array()
    assert sym_rpq(Tensor.from_array(TensorSpace(2, 1, 1, 1), arr)) == sym


def test_cyclic_sum_examples():
    sp = TensorSpace(2, 0, 2, 0)
    t = Tensor(sp, {((), (0, 1), ()): 1})
    assert cyclic_sum(t, [0]) == t
    assert cyclic_sum(t, [0, 1]) == Tensor(sp, {((), (0, 1), ()): 1, ((), (1, 0), ()): 1})
    s = Tensor(sp, {((), (0, 1), ()): 2, ((), (1, 0), ()): 2, ((), (1, 1), ()): 1})
    assert cyclic_sum(s, [0, 1]) == s * 2
    with pytest.raises(TensorError):
        cyclic_sum(t, [0, 2])


def test_alternation_examples():
    o2 = make_group("o:2")
    sp = TensorSpace(2, 0, 2, 1)
    assert alternation_delta(Tensor.zero(sp), o2).is_zero()
    # tau = v*^1 (x) A, A v_1 = v_2, A v_2 = -v_1
    tau = Tensor(sp, {((), (0, 0), (1,)): 1, ((), (0, 1), (0,)): -1})
    out = alternation_delta(tau, o2)
    assert out.component((), (0, 1), (0,)) == -1 and out.component((), (0, 1), (1,)) == 0
    assert out.component((), (1, 0), (0,)) == 1
    sc = make_group("scalar:2")
    tau = Tensor(sp, {((), (0, 0), (0,)): 1, ((), (0, 1), (1,)): 1})
    out = alternation_delta(tau, sc)
    assert out.component((), (0, 1), (1,)) == 1 and out.component((), (1, 0), (1,)) == -1
    with pytest.raises(TensorError):
        alternation_delta(Tensor(sp, {((), (0, 0), (0,)): 1}), o2)


def test_spencer_examples():
    # S^1 (x) V* (x) V -> /\^2 V* (x) V
    t = Tensor(TensorSpace(2, 1, 1, 1), {((0,), (1,), (0,)): 1})
    out = spencer_delta(t, 2)
    assert out == Tensor(TensorSpace(2, 0, 2, 1), {((), (0, 1), (0,)): 1, ((), (1, 0), (0,)): -1})
    # spencer kills fully symmetric tensors
    full = Tensor.from_vector(TensorSpace(2, 3, 0, 1), range(1, 9))
    housed = Tensor.from_array(TensorSpace(2, 2, 1, 1), full.to_array())
    assert spencer_delta(housed, 2).is_zero()


def test_gl_action_examples():
    sp = TensorSpace(2, 1, 1, 1)
    t = Tensor.from_vector(sp, range(sp.dim))
    assert gl_action(RatMatrix.identity(2), t) == t
    u = Tensor(TensorSpace(2, 0, 1, 1), {((), (0,), (0,)): 1})
    assert gl_action(RatMatrix.diag([2, 1]), u) == u
    perm = RatMatrix.from_rows([[0, 1], [1, 0]])
    b = Tensor(sp, {((0,), (0,), (1,)): 1})
    assert gl_action(perm, b) == Tensor(sp, {((1,), (1,), (0,)): 1})
    with pytest.raises(TensorError):
        gl_action(RatMatrix.zeros(2, 2), t)


invertibles = [ROT345, RatMatrix.from_rows([[1, 2], [0, -1]]), RatMatrix.from_rows([[F(1, 2), 1], [3, -1]])]


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(invertibles), st.sampled_from(invertibles), st.integers(0, 2), st.data())
def test_gl_action_law_and_equivariance(a, b, r, data):
    sp = TensorSpace(2, r, 1, 1)
    t = random_tensor(data.draw, sp)
    assert gl_action(a @ b, t) == gl_action(a, gl_action(b, t))
    assert sym_rpq(gl_action(a, t)) == gl_action(a, sym_rpq(t))
    assert cyclic_sum(gl_action(a, t), list(range(r + 1))) == gl_action(a, cyclic_sum(t, list(range(r + 1))))
    if r >= 1:
        assert spencer_delta(gl_action(a, t), 2) == gl_action(a, spencer_delta(t, 2))


@pytest.mark.parametrize("n,r", [(n, r) for n in (1, 2, 3) for r in (0, 1, 2)])
def test_decomposition_dimensions(n, r):
    # V^{r+1,1}_1 = Vbar (+) ker(spencer), ker(spencer) = S^{r+2} (x) V
    dom = TensorSpace(n, r + 1, 1, 1)
    spm = linear_map_matrix(lambda t: spencer_delta(t, 2), dom)
    sym = linear_map_matrix(sym_rpq, dom)
    kernel_spencer = len(spm.kernel())
    assert kernel_spencer == TensorSpace(n, r + 2, 0, 1).dim
    assert len(sym.kernel()) + kernel_spencer == dom.dim
    # the stated inverse on the image of spencer
    inv = linear_map_matrix(lambda t: sym_rpq(t) * F(r + 1, r + 2), TensorSpace(n, r, 2, 1))
    vbar = [Tensor.from_vector(dom, v) for v in sym.kernel()]
    for v in vbar:
        assert Tensor.from_vector(dom, inv @ spencer_delta(v, 2).to_vector()) == v


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2), st.data())
def test_sym_kernel_image_dims(n, r, data):
    sp = TensorSpace(n, r, 1, 1)
    m = linear_map_matrix(sym_rpq, sp)
    assert m.rank() == TensorSpace(n, r + 1, 0, 1).dim
    t = random_tensor(data.draw, sp)
    s = sym_rpq(t)
    assert sym_rpq(Tensor.from_array(sp, s.to_array())) == s
