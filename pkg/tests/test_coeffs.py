import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from toeplitz_spheres.coeffs import (
    INF,
    Const,
    Ind,
    Pow,
    Poly,
    Prod,
    QPow,
    Sqrt,
    SqrtConst,
    Sum,
    ZeroStatus,
    equal,
    eval_expr,
    is_zero,
    normalize,
    restrict_inf,
    shift,
    vanishes,
)
from toeplitz_spheres.spheres import build_generators

Z, NZ = ZeroStatus.PROVABLY_ZERO, ZeroStatus.PROVABLY_NONZERO


def test_eval_examples():
    assert eval_expr(Prod((Pow(1), Pow(2))), (1, 2), 0.5) == pytest.approx(0.125)
    assert eval_expr(Sqrt(1), (INF, 3), 0.5) == 1
    assert eval_expr(Sqrt(1), (0,), 0.5) == 0
    assert eval_expr(Pow(1, 2, 1), (INF,), 0.5) == 0
    assert eval_expr(Ind(1, 3), (INF,), 0.5) == 1
    assert eval_expr(Ind(1, 3), (2,), 0.5) == 0
    assert eval_expr(QPow(3), (), 0.5) == pytest.approx(0.125)
    assert eval_expr(SqrtConst(1), (), 0.5) == pytest.approx(math.sqrt(0.75))


def test_eval_slot_out_of_range():
    with pytest.raises(IndexError):
        eval_expr(Pow(3), (1, 2), 0.5)


def test_shift_examples():
    assert shift(Pow(1), (-1,)) == Pow(1, 1, -1)
    assert shift(Sqrt(1), (1,)) == Sqrt(1, 1)
    assert shift(Ind(2, 1), (0, 2)) == Ind(2, -1)
    assert shift(Sqrt(1), (-2,)) == Prod((Sqrt(1, -2), Ind(1, 2)))


def test_restrict_examples():
    assert is_zero(restrict_inf(Prod((Pow(1), Sqrt(2))), 1)) is Z
    assert restrict_inf(Sqrt(1), 1) == Const(1)
    assert restrict_inf(Const(3), 2) == Const(3)


def test_is_zero_examples():
    s = Sqrt(1)
    e = Sum((Prod((s, s)), Pow(1, 2, 0))) - Const(1)
    assert is_zero(e) is Z
    assert is_zero(Pow(1)) is NZ
    assert equal(Pow(1) * Sqrt(2, 1), Pow(1) * Sqrt(2, 1)) is Z


def test_is_zero_needs_case_split():
    # equal as functions on w >= 0 but with different normal forms
    a = Prod((Ind(1, 1), Const(1) - Pow(1, 2)))
    b = Const(1) - Pow(1, 2)
    assert Poly.from_expr(a) != Poly.from_expr(b)
    assert equal(a, b) is Z
    assert equal(Ind(1, 2), Ind(1, 1)) is NZ


def test_sqrt_square_rewrite():
    s = Sqrt(1, 2)
    got = Poly.from_expr(s * s)
    want = Poly.from_expr(Const(1) - QPow(4) * Pow(1, 2))
    assert vanishes(got - want)


def test_sqrt_negative_offset_square_keeps_guard():
    s = Sqrt(1, -1)
    assert equal(s * s, Ind(1, 1) * (Const(1) - QPow(-2) * Pow(1, 2))) is Z
    for w in range(4):
        assert eval_expr(normalize(s * s), (w,), 0.5) == pytest.approx(eval_expr(s * s, (w,), 0.5))


def test_sqrt_const_square():
    assert equal(SqrtConst(2) * SqrtConst(2), Const(1) - QPow(4)) is Z


def test_render_is_deterministic():
    e = Pow(2) * Sqrt(1) + Const(2) * Ind(1, 2)
    assert Poly.from_expr(e).render() == Poly.from_expr(Const(2) * Ind(1, 2) + Sqrt(1) * Pow(2)).render()


# ---------------------------------------------------------------------------
# random expressions


N_SLOTS = 2
units = st.tuples(*[st.one_of(st.integers(0, 8), st.just(INF))] * N_SLOTS)
qs = st.sampled_from([0.1, 0.3, 0.5, 0.7, 0.9])

atoms = st.one_of(
    st.builds(Const, st.sampled_from([1, -1, 2, 0.5, 1j])),
    st.builds(QPow, st.integers(-2, 3)),
    st.builds(Pow, st.integers(1, N_SLOTS), st.integers(1, 3), st.integers(-2, 2)),
    st.builds(Sqrt, st.integers(1, N_SLOTS), st.integers(-1, 2)),
    st.builds(Ind, st.integers(1, N_SLOTS), st.integers(-1, 3)),
    st.builds(SqrtConst, st.integers(0, 3)),
)
exprs = st.recursive(
    atoms,
    lambda inner: st.one_of(
        st.builds(lambda t: Sum(tuple(t)), st.lists(inner, min_size=1, max_size=3)),
        st.builds(lambda t: Prod(tuple(t)), st.lists(inner, min_size=1, max_size=3)),
    ),
    max_leaves=8,
)
shifts = st.tuples(*[st.integers(-3, 3)] * N_SLOTS)


@settings(max_examples=1000, deadline=None)
@given(exprs, units, qs)
def test_normal_form_preserves_values(e, w, q):
    v = eval_expr(e, w, q)
    assert abs(eval_expr(normalize(e), w, q) - v) < 1e-12 * max(1.0, abs(v))


@settings(max_examples=300, deadline=None)
@given(exprs, qs)
def test_eval_grid_matches_pointwise(e, q):
    p = Poly.from_expr(e)
    W = np.array([[a, b] for a in (0, 1, 3, INF) for b in (0, 2, INF)], dtype=float)
    grid = p.eval_grid(W, q)
    for row, v in zip(W, grid):
        w = tuple(INF if math.isinf(t) else int(t) for t in row)
        ref = p.eval(w, q)
        assert abs(v - ref) < 1e-12 * max(1.0, abs(ref))


def _shift_unit(w, x):
    return tuple(v if v == INF else v + d for v, d in zip(w, x))


def test_shift_definitional_oracle():
    """eval(shift(e, x), w) == eval(e, w + x) on 10^4 random valid cases."""
    rng = np.random.default_rng(7)
    gen = [
        lambda: Pow(int(rng.integers(1, 3)), int(rng.integers(1, 3)), int(rng.integers(-2, 3))),
        lambda: Sqrt(int(rng.integers(1, 3)), int(rng.integers(-1, 3))),
        lambda: Ind(int(rng.integers(1, 3)), int(rng.integers(-1, 4))),
        lambda: Const(float(rng.normal())),
    ]
    checked = 0
    while checked < 10_000:
        e = Prod(tuple(gen[int(rng.integers(0, 4))]() for _ in range(int(rng.integers(1, 4)))))
        e = e + gen[int(rng.integers(0, 4))]()
        x = tuple(int(v) for v in rng.integers(-3, 4, size=2))
        w = tuple(INF if rng.random() < 0.2 else int(rng.integers(0, 8)) for _ in range(2))
        wx = _shift_unit(w, x)
        if any(v < 0 for v in wx):
            continue
        q = float(rng.choice([0.2, 0.5, 0.9]))
        assert abs(eval_expr(shift(e, x), w, q) - eval_expr(e, wx, q)) < 1e-12
        assert abs(Poly.from_expr(e).shift(x).eval(w, q) - eval_expr(e, wx, q)) < 1e-12
        checked += 1


@settings(max_examples=300, deadline=None)
@given(exprs, shifts, shifts)
def test_shift_composition(e, x, y):
    """Equal wherever the intermediate unit ``w + y`` is valid."""
    xy = tuple(a + b for a, b in zip(x, y))
    guard = Prod(tuple(Ind(j, -d) for j, d in enumerate(y, 1) if d < 0)) if min(y) < 0 else Const(1)
    assert equal(guard * shift(shift(e, x), y), guard * shift(e, xy)) is Z
    p, g = Poly.from_expr(e), Poly.from_expr(guard)
    assert vanishes(g * p.shift(x).shift(y) - g * p.shift(xy))


def test_shift_composition_needs_intermediate_domain():
    # the normal form drops Ind(1, 0) (true on every unit), so shifting up
    # then down forgets the constraint at w = 0; expression trees keep it
    e = Ind(1, 1)
    p = Poly.from_expr(e)
    assert not vanishes(p.shift((1,)).shift((-1,)) - p)
    assert equal(shift(shift(e, (1,)), (-1,)), e) is Z


@settings(max_examples=300, deadline=None)
@given(exprs)
def test_restrictions_commute(e):
    a = restrict_inf(restrict_inf(e, 1), 2)
    b = restrict_inf(restrict_inf(e, 2), 1)
    assert equal(a, b) is Z
    p = Poly.from_expr(e)
    assert vanishes(p.restrict(1).restrict(2) - p.restrict(2).restrict(1))


@settings(max_examples=300, deadline=None)
@given(exprs, units, qs)
def test_restrict_matches_substitution(e, w, q):
    w_inf = (INF,) + w[1:]
    v = eval_expr(e, w_inf, q)
    tol = 1e-12 * max(1.0, abs(v))
    assert abs(eval_expr(restrict_inf(e, 1), w_inf, q) - v) < tol
    assert abs(Poly.from_expr(e).restrict(1).eval(w, q) - v) < tol


@settings(max_examples=500, deadline=None)
@given(exprs, exprs)
def test_zero_test_is_sound(a, b):
    """ProvablyZero differences are zero at every probe; ProvablyNonzero ones are not."""
    status = equal(a, b)
    probes = [(u, v) for u in (0, 1, 2, 3, 5, 9, INF) for v in (0, 1, 2, 3, 5, 9, INF)]
    gaps = [abs(eval_expr(a, w, q) - eval_expr(b, w, q)) / max(1.0, abs(eval_expr(a, w, q)))
            for w in probes for q in (0.3, 0.5, 0.9)]
    if status is Z:
        assert max(gaps) < 1e-10
    elif status is NZ:
        assert max(gaps) > 1e-9
    # a product with itself minus its normal form is always certified
    assert equal(a, normalize(a)) is Z


def _continuity_K(q, tol=1e-10):
    """Smallest K >= 40 with q**K < tol (so every generator atom has converged)."""
    return max(40, math.ceil(math.log(tol / 10) / math.log(q)))


@pytest.mark.parametrize("q", [0.3, 0.5, 0.9])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_continuity_at_infinity_for_generators(n, q):
    gens = build_generators(n, q)
    K = _continuity_K(q)
    if q <= 0.5:
        assert K == 40
    for y in gens.Y:
        for _, p in y.terms.items():
            e = p.to_expr()
            for j in range(1, n + 1):
                for base in [(0,) * n, (3,) * n, (INF,) * n]:
                    w = base[: j - 1] + (K,) + base[j:]
                    w_inf = base[: j - 1] + (INF,) + base[j:]
                    assert abs(eval_expr(e, w, q) - eval_expr(restrict_inf(e, j), w_inf, q)) < 1e-10


def test_continuity_bound_is_q_dependent():
    # at q = 0.9 and K = 40 a Pow atom is still far from its limit 0
    assert eval_expr(Pow(1), (40,), 0.9) > 1e-2
