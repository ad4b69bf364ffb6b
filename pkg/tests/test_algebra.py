import itertools
import random

import pytest

from toeplitz_spheres import groupoid as gp
from toeplitz_spheres.algebra import (
    AlgebraElement as A,
    CertStatus,
    adjoint,
    boundary_compatible,
    embed_into_face_n,
    equal,
    phi_pushforward,
    pi_pullback_n_boundary,
    pi_pullback_ni,
    rho_boundary,
    rho_face,
    rho_n_boundary,
    sim_invariant,
    support_subset_ftilde,
    vanishes_on_boundary,
)
from toeplitz_spheres.coeffs import INF, Const, Ind, Pow, Poly, Sqrt, vanishes
from toeplitz_spheres.spheres import Words, build_generators, t_only

ALPHA_STAR = A.single(1, 0, (-1,), Sqrt(1))
ALPHA = A.single(1, 0, (1,), Sqrt(1, 1))
GAMMA = A.single(1, 0, (0,), Pow(1))


def poly(e):
    return Poly.from_expr(e)


# ---------------------------------------------------------------------------
# convolution and adjoint


def test_alpha_star_alpha():
    got = ALPHA_STAR * ALPHA
    assert list(got.terms) == [(0, (0,))]
    assert vanishes(got.coefficient(0, (0,)) - poly(Const(1) - Pow(1, 2, 1)))


def test_unit_is_neutral():
    for f in (ALPHA, ALPHA_STAR, GAMMA, ALPHA + GAMMA):
        assert A.unit(1) * f == f
        assert f * A.unit(1) == f


def test_gamma_squared():
    assert equal(GAMMA * GAMMA, A.single(1, 0, (0,), Pow(1, 2, 0)))


def test_adjoint_examples():
    assert equal(adjoint(ALPHA_STAR), ALPHA)
    f = ALPHA + 2 * GAMMA + A.single(1, 1, (-1,), Sqrt(1) * Pow(1))
    assert equal(adjoint(adjoint(f)), f)
    assert equal(adjoint(GAMMA), GAMMA)
    assert equal(adjoint(A.single(1, 0, (0,), Const(1j))), A.single(1, 0, (0,), Const(-1j)))


def test_domain_guard_on_construction():
    # a shift that lowers slot 1 needs w_1 >= 1
    f = A.single(1, 0, (-1,), Const(1))
    assert vanishes(f.coefficient(0, (-1,)) - poly(Ind(1, 1)))
    assert f.value(gp.make_element(0, (-1,), (3,)), 0.5) == 1


def test_mismatched_elements():
    with pytest.raises(ValueError):
        A.unit(1) + A.unit(2)
    with pytest.raises(ValueError):
        A.unit(2) * A.unit(2, {1})
    with pytest.raises(ValueError):
        A.single(2, 0, (0,), 1)


def _word_elements(n, L):
    words = Words(build_generators(n, 0.5).letters(), n)
    return words, words.all(L)


@pytest.mark.parametrize("n", [1, 2])
def test_star_algebra_laws_on_words(n):
    words, all_words = _word_elements(n, 3)
    short = [w for w in all_words if len(w) <= 1]
    for u, v in itertools.product(all_words, repeat=2):
        if len(u) + len(v) > 3:
            continue
        fu, fv = words.element(u), words.element(v)
        assert equal(adjoint(fu * fv), adjoint(fv) * adjoint(fu)), (u, v)
    for u, v, w in itertools.product(short + [x for x in all_words if len(x) == 2], repeat=3):
        if len(u) + len(v) + len(w) > 3:
            continue
        fu, fv, fw = words.element(u), words.element(v), words.element(w)
        assert equal((fu * fv) * fw, fu * (fv * fw)), (u, v, w)
        assert equal(fu * (fv + fw), fu * fv + fu * fw)
        assert equal((fv + fw) * fu, fv * fu + fw * fu)


@pytest.mark.parametrize("n", [2, 3])
def test_restriction_is_multiplicative(n):
    words, all_words = _word_elements(n, 2)
    for u, v in itertools.product(all_words, repeat=2):
        fu, fv = words.element(u), words.element(v)
        for i in range(1, n + 1):
            assert equal(rho_face(fu * fv, i), rho_face(fu, i) * rho_face(fv, i)), (u, v, i)
            assert equal(rho_face(adjoint(fu), i), adjoint(rho_face(fu, i)))


# ---------------------------------------------------------------------------
# certificates


def test_t_only_refuted_at_boundary():
    for n in (1, 2, 3):
        c = support_subset_ftilde(t_only(n))
        assert c.status is CertStatus.REFUTED
        (g,) = c.witness
        assert INF in g.w and not gp.in_ftilde(g)
        assert abs(c.values[0]) > 1e-9


def test_zero_and_constants_certified():
    assert support_subset_ftilde(A.zero(2)).certified
    assert vanishes_on_boundary(A.zero(2)).certified
    assert sim_invariant(A.unit(3).scale(2.5)).certified


def test_crafted_class_splitting_element():
    f = A.single(2, 0, (0, 0), Ind(1, 0) * Pow(2))
    assert support_subset_ftilde(f).certified
    c = sim_invariant(f)
    assert c.status is CertStatus.REFUTED
    g, h = c.witness
    assert gp.sim_equivalent(g, h)
    assert abs(f.value(g, c.q) - f.value(h, c.q)) > 1e-9


def test_sim_invariant_requires_support():
    with pytest.raises(ValueError):
        sim_invariant(t_only(2))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_generators_certified(n):
    for y in build_generators(n, 0.5).Y:
        assert support_subset_ftilde(y).certified
        assert sim_invariant(y).certified
        assert support_subset_ftilde(adjoint(y)).certified


def test_closure_of_certified_elements():
    n = 2
    words, all_words = _word_elements(n, 2)
    rng = random.Random(3)
    for _ in range(60):
        u, v = rng.choice(all_words), rng.choice(all_words)
        f = words.element(u) * adjoint(words.element(v)) + words.element(v)
        assert support_subset_ftilde(f).certified
        assert sim_invariant(f).certified


def _window_values(f, q, N=3):
    units = itertools.product(list(range(N + 1)) + [INF], repeat=f.n)
    for w in units:
        for (z, x) in f.terms:
            if all(v == INF or v + d >= 0 for v, d in zip(w, x)):
                g = gp.GroupoidElement(z, x, w)
                yield g, f.value(g, q)


@pytest.mark.parametrize("n", [2, 3])
def test_certificates_match_window_scan(n):
    words, all_words = _word_elements(n, 2)
    for w in all_words:
        f = words.element(w)
        for g, v in _window_values(f, 0.5):
            if not gp.in_ftilde(g):
                assert abs(v) < 1e-12
            else:
                assert abs(v - f.value(gp.canonicalize(g), 0.5)) < 1e-12


# ---------------------------------------------------------------------------
# face restrictions and pullbacks


def test_lemma_restriction_examples():
    Y = build_generators(2, 0.5).Y
    assert rho_face(Y[0], 1).is_zero()
    assert rho_face(Y[1], 1).is_zero()
    assert equal(rho_face(Y[2], 1), A.single(2, 1, (-1, 0), Const(1), {1}))
    assert equal(rho_face(A.unit(2), 2), A.unit(2, {2}))


def test_pullback_examples():
    n = 3
    gens = build_generators(n, 0.5)
    for y in gens.Y:
        a = rho_face(y, n)
        assert equal(rho_n_boundary(pi_pullback_n_boundary(a)), a)
        for i in range(1, n):
            b = rho_face(rho_face(y, i), n)
            assert equal(pi_pullback_ni(b, i), rho_face(y, i))
    assert pi_pullback_ni(A.zero(3, {1, 3}), 1).is_zero()


def test_pullback_domain_errors():
    with pytest.raises(gp.DomainError):
        pi_pullback_n_boundary(A.unit(2, {1}))
    with pytest.raises(gp.DomainError):
        pi_pullback_ni(A.unit(3, {1}), 1)


def test_boundary_compatible_examples():
    n = 3
    words, all_words = _word_elements(n, 2)
    for w in all_words:
        assert boundary_compatible(rho_boundary(words.element(w)))
    fam = list(rho_boundary(A.unit(n)))
    fam[1] = A.zero(n, {2})
    assert not boundary_compatible(fam)
    assert boundary_compatible([A.zero(n, {i}) for i in range(1, n + 1)])


def test_vanishes_on_boundary_examples():
    for n in (1, 2, 3):
        gens = build_generators(n, 0.5)
        L = gens.letters()
        assert vanishes_on_boundary(L["Y1"] * L["Y1*"]).certified
        c = vanishes_on_boundary(gens.Y[1])
        assert c.status is CertStatus.REFUTED
    assert vanishes_on_boundary(A.zero(2)).certified


@pytest.mark.parametrize("n", [1, 2])
def test_kernel_characterization(n):
    words, all_words = _word_elements(n, 2)
    for w in all_words:
        f = words.element(w)
        for g in (f, f * adjoint(f), words.element(("Y1",)) * f):
            certified = vanishes_on_boundary(g).certified
            assert certified == all(rho_face(g, i).is_zero() for i in range(1, n + 1))


def test_phi_pushforward_matches_restriction():
    for n in (2, 3):
        big, small = build_generators(n, 0.5), build_generators(n - 1, 0.5)
        for m in range(1, n + 1):
            moved = phi_pushforward(embed_into_face_n(small.Y[m - 1]))
            assert equal(moved, rho_face(big.Y[m], n))


def test_serialization_golden():
    L = build_generators(2, 0.5).letters()
    assert (L["Y2"] * L["Y2*"]).serialize() == (
        "AlgebraElement n=2 face=-\n"
        "0 0,0 : q^(2*w1) - q^2*q^(2*w1)*q^(2*w2)\n"
    )
    assert rho_face(L["Y3"], 1).serialize() == "AlgebraElement n=2 face=1\n1 -1,0 : 1\n"
