import pytest

from toeplitz_spheres import spheres as S
from toeplitz_spheres.algebra import AlgebraElement as A, adjoint, equal
from toeplitz_spheres.coeffs import Pow, Prod, Sqrt
from toeplitz_spheres.report import CheckReport


def test_build_generators_validation():
    with pytest.raises(ValueError):
        S.build_generators(0, 0.5)
    with pytest.raises(ValueError):
        S.build_generators(2, 1.0)
    with pytest.raises(ValueError):
        S.generator(2, 4)


def test_generator_shapes():
    n = 3
    gens = S.build_generators(n, 0.5)
    assert [list(y.terms) for y in gens.Y] == [
        [(1, (0, 0, 0))],
        [(1, (0, 0, -1))],
        [(1, (0, -1, 0))],
        [(1, (-1, 0, 0))],
    ]
    assert [gens.slot(m) for m in range(1, n + 2)] == [4, 3, 2, 1]
    want = A.single(n, 1, (0, -1, 0), Prod((Pow(1), Sqrt(2))))
    assert equal(gens.Y[2], want)


def test_n1_generators_are_t_gamma_and_t_alpha_star():
    gens = S.build_generators(1, 0.5)
    L = S.su2q_letters()
    assert list(gens.Y[0].terms) == [(1, (0,))]
    assert equal(gens.Y[1], A.single(1, 1, (-1,), Sqrt(1)))
    # dropping the circle mode recovers gamma and alpha*
    assert equal(A(1, {(0, x): c for (_, x), c in gens.Y[0].terms.items()}), L["g"])
    assert equal(A(1, {(0, x): c for (_, x), c in gens.Y[1].terms.items()}), L["a*"])


def test_words_memoised():
    words = S.Words(S.build_generators(2, 0.5).letters(), 2)
    w = ("Y1", "Y2*", "Y3")
    assert words.element(w) is words.element(w)
    assert len(words.all(2)) == 1 + 6 + 36
    assert S.word_name(()) == "1"


def test_band_growth_bound():
    gens = S.build_generators(2, 0.5)
    words = S.Words(gens.letters(), 2)
    for w in words.all(3):
        f = words.element(w)
        assert f.shift_bound() <= len(w)
        assert all(abs(z) <= len(w) for z, _ in f.terms)


def test_dual_check_detects_a_false_identity():
    gens = S.build_generators(2, 0.5)
    L = gens.letters()
    # Y2 Y3 = q Y3 Y2 (slot 2 vs slot 1 is the wrong order)
    zero, residual, _ = S.dual_check([(1, 0, ("Y2", "Y3")), (-1, 1, ("Y3", "Y2"))], L, 2, 0.5, 10)
    assert not zero and residual > 1e-3
    # a single letter minus itself
    zero, residual, _ = S.dual_check([(1, 0, ("Y1",)), (-1, 0, ("Y1",))], L, 2, 0.5, 10)
    assert zero and residual == 0


def test_su2q_relations():
    assert S.check_su2q_relations(0.5, 20).passed


@pytest.mark.parametrize("n", [1, 2, 3])
def test_sphere_relations(n):
    rep = S.check_sphere_relations(n, 0.5, 8)
    assert rep.passed
    assert rep["sum Y_m* Y_m = 1"].residual < 1e-12
    assert len(rep.results) == 1 + n * (n + 1) // 2


def test_unit_identity_fails_without_Y1():
    gens = S.build_generators(2, 0.5)
    terms = [(1, 0, (f"Y{m}*", f"Y{m}")) for m in (2, 3)] + [(-1, 0, ())]
    zero, residual, _ = S.dual_check(terms, gens.letters(), 2, 0.5, 8)
    assert not zero and residual > 1e-3


def test_lemma_needs_n2():
    with pytest.raises(ValueError):
        S.check_lemma_restrictions(1)
    assert S.check_lemma_restrictions(2, 0.5, 2).passed


def test_theorem_small():
    rep = S.check_theorem_support(2, 0.5, 2)
    assert rep.passed
    assert "negative control: t-only element refuted" in rep.names()


def test_set_identities_small():
    with pytest.raises(ValueError):
        S.check_set_identities(1)
    rep = S.check_set_identities(2, 1, 1, 1)
    assert rep.passed
    assert all(r.details.get("mismatches", 0) == 0 for r in rep.results)


def test_set_identities_interior_only_window():
    # N = 0 still has the inf point; with z = x = 0 only units appear
    rep = S.check_set_identities(2, 0, 0, 0)
    assert rep.passed


def test_exactness_n1():
    rep = S.check_exactness(1, 0.5, 2, 2, 6)
    assert rep.passed


def test_richness_fails_for_short_words():
    # words of length <= 1 cannot reach every matrix unit of the finite block
    res = S._finite_block_span_residual(0.5, 2, 1)
    assert max(res.values()) > 1e-3


def test_qindep_rejects_equal_q():
    with pytest.raises(ValueError):
        S.check_q_independence_proxy(1, 0.5, 0.5)


def test_qindep_trivial_length():
    rep = S.check_q_independence_proxy(1, 0.3, 0.7, 0, 4)
    assert rep.passed
    assert rep["Gram ranks of word spans agree"].details["rank_q1"] == 1


def test_quotient_soundness_small_and_deterministic():
    a = S.check_quotient_soundness(2, 300, seed=5)
    b = S.check_quotient_soundness(2, 300, seed=5)
    assert a.passed
    assert a.dumps() == b.dumps()


def test_oracle_coherence_flags_bad_identity():
    bad = CheckReport("fake")
    bad.record("x", True, 1.0, symbolic_zero=True)
    rep = S.check_oracle_coherence(20, 0, 6, [bad])
    assert not rep["no symbolically zero identity is numerically nonzero"].passed


def test_random_element_is_deterministic():
    from toeplitz_spheres.rng import LCG
    f = S.random_element(LCG(9), 2)
    g = S.random_element(LCG(9), 2)
    assert f == g


def test_adjoint_letters_consistent():
    gens = S.build_generators(2, 0.5)
    L = gens.letters()
    for m in range(1, 4):
        assert equal(adjoint(L[f"Y{m}"]), L[f"Y{m}*"])
