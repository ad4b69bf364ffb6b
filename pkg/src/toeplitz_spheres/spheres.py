"""Quantum-sphere generators as groupoid functions, and the verification suites.

The generator ``Y_m`` (``1 <= m <= n+1``) is a single-shift element with one
unit of the global circle mode:

* ``Y_1``: shift ``(1, 0)``, coefficient ``q^(w_1 + ... + w_n)``;
* ``Y_m``, ``m >= 2``: acts on slot ``j = n + 2 - m`` with shift ``(1, -e_j)``
  and coefficient ``q^(w_1 + ... + w_{j-1}) sqrt(1 - q^(2 w_j))``.

``Y_1`` is treated as acting on the virtual slot ``n + 1``, which makes the
commutation rule uniform: ``Y Y' = q Y' Y`` whenever ``Y`` acts on a lower slot
than ``Y'``.

Every identity is checked twice: exactly, on the symbolic algebra, and
numerically, by multiplying truncated matrices and comparing the columns that
the truncation cannot reach.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from . import groupoid as gp
from .algebra import (
    AlgebraElement,
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
from .coeffs import INF, Const, Ind, Pow, Prod, Sqrt
from .report import CheckReport
from .represent import (
    ReprConfig,
    column_residual,
    gram_rank,
    gram_singular_values,
    identity,
    interior_mask,
    to_matrix,
)
from .rng import LCG

DEFAULT_ANGLES = (0.0, 2 * math.pi / 7, math.pi / 2)
SYMBOLIC_NUMERIC_TOL = 1e-12
COHERENCE_TOL = 1e-10
GRAM_TOL = 1e-9
RICHNESS_TOL = 1e-8


@dataclass
class GeneratorSet:
    n: int
    q: float
    Y: list

    def slot(self, m: int) -> int:
        return self.n + 1 if m == 1 else self.n + 2 - m

    def letters(self) -> dict:
        """``{"Y1": Y_1, "Y1*": Y_1^*, ...}``."""
        out = {}
        for m, y in enumerate(self.Y, start=1):
            out[f"Y{m}"] = y
            out[f"Y{m}*"] = adjoint(y)
        return out


def generator(n: int, m: int) -> AlgebraElement:
    if not 1 <= m <= n + 1:
        raise ValueError(f"generator index {m} outside 1..{n + 1}")
    if m == 1:
        return AlgebraElement.single(n, 1, (0,) * n, Prod(tuple(Pow(l) for l in range(1, n + 1))))
    j = n + 2 - m
    x = tuple(-1 if l == j else 0 for l in range(1, n + 1))
    return AlgebraElement.single(n, 1, x, Prod(tuple(Pow(l) for l in range(1, j)) + (Sqrt(j),)))


def build_generators(n: int, q: float = 0.5) -> GeneratorSet:
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0 < q < 1:
        raise ValueError("q must lie in (0, 1)")
    return GeneratorSet(n, q, [generator(n, m) for m in range(1, n + 2)])


def t_only(n: int) -> AlgebraElement:
    """The bare circle mode ``{(1, 0) -> 1}``; not supported in F~_n."""
    return AlgebraElement.single(n, 1, (0,) * n, 1)


class Words:
    """Words in a letter table, built by memoised left multiplication."""

    def __init__(self, letters: dict, n: int, face=()):
        self.letters = letters
        self.n = n
        self.face = face
        self._cache = {(): AlgebraElement.unit(n, face)}

    def element(self, word: tuple) -> AlgebraElement:
        word = tuple(word)
        hit = self._cache.get(word)
        if hit is None:
            hit = self.letters[word[0]] * self.element(word[1:])
            self._cache[word] = hit
        return hit

    def all(self, L: int) -> list:
        names = list(self.letters)
        out = []
        for k in range(L + 1):
            out.extend(itertools.product(names, repeat=k))
        return out


def word_name(word) -> str:
    return " ".join(word) if word else "1"


# ---------------------------------------------------------------------------
# dual-route identities


def _combine(terms, elems: Words) -> AlgebraElement:
    total = AlgebraElement.zero(elems.n, elems.face)
    for c, qexp, word in terms:
        total = total + elems.element(word).scale(c, qexp)
    return total


def _numeric_residual(terms, letters: dict, cfg: ReprConfig) -> float:
    mats = {k: to_matrix(v, cfg) for k, v in letters.items()}
    I = identity(cfg)
    total = None
    for c, qexp, word in terms:
        M = reduce(lambda a, b: a @ b, (mats[w] for w in word), I)
        M = M * (c * cfg.q ** qexp)
        total = M if total is None else total + M
    B = max(len(w) for _, _, w in terms)
    cols = interior_mask(cfg, B)
    return column_residual(total, total * 0, cols)


def _angle_pair(a, n: int):
    theta, phi = a if isinstance(a, tuple) else (a, a)
    return theta, (phi,) * n


def dual_check(terms, letters: dict, n: int, q: float, N: int, angles=DEFAULT_ANGLES):
    """Evaluate ``sum c q^k word`` symbolically and numerically.

    ``angles`` holds either single angles (used for theta and every phi) or
    ``(theta, phi)`` pairs.  Returns ``(symbolically_zero, max_numeric_residual,
    element)``.
    """
    elems = Words(letters, n)
    total = _combine(terms, elems)
    residual = 0.0
    for a in angles:
        theta, phi = _angle_pair(a, n)
        cfg = ReprConfig(n, N, q, theta, phi)
        residual = max(residual, _numeric_residual(terms, letters, cfg))
    return total.is_zero(), residual, total


def _record_identity(report, name, terms, letters, n, q, N, angles=DEFAULT_ANGLES,
                     tol=SYMBOLIC_NUMERIC_TOL):
    zero, residual, total = dual_check(terms, letters, n, q, N, angles)
    ok = zero and residual < tol
    return report.record(
        name, ok, residual, symbolic_zero=zero,
        symbolic="ProvablyZero" if zero else total.serialize(),
    )


# ---------------------------------------------------------------------------
# relations


def su2q_letters() -> dict:
    alpha_star = AlgebraElement.single(1, 0, (-1,), Sqrt(1, 0))
    gamma = AlgebraElement.single(1, 0, (0,), Pow(1, 1, 0))
    return {"a": adjoint(alpha_star), "a*": alpha_star, "g": gamma, "g*": adjoint(gamma)}


def check_su2q_relations(q: float = 0.5, N: int = 20, angles=DEFAULT_ANGLES,
                         tol: float = SYMBOLIC_NUMERIC_TOL) -> CheckReport:
    """The single-factor relations of the alpha/gamma convention."""
    rep = CheckReport("su2q_relations", {"q": q, "N": N})
    L = su2q_letters()
    identities = {
        "a a* + g g* = 1": [(1, 0, ("a", "a*")), (1, 0, ("g", "g*")), (-1, 0, ())],
        "a* a + q^2 g* g = 1": [(1, 0, ("a*", "a")), (1, 2, ("g*", "g")), (-1, 0, ())],
        "g a = q a g": [(1, 0, ("g", "a")), (-1, 1, ("a", "g"))],
        "g g* = g* g": [(1, 0, ("g", "g*")), (-1, 0, ("g*", "g"))],
    }
    with rep.timed():
        for name, terms in identities.items():
            _record_identity(rep, name, terms, L, 1, q, N, angles, tol)
    return rep


def check_sphere_relations(n: int, q: float = 0.5, N: int = 10, angles=DEFAULT_ANGLES,
                           tol: float = SYMBOLIC_NUMERIC_TOL) -> CheckReport:
    rep = CheckReport("sphere_relations", {"n": n, "q": q, "N": N})
    gens = build_generators(n, q)
    L = gens.letters()
    with rep.timed():
        unit_terms = [(1, 0, (f"Y{m}*", f"Y{m}")) for m in range(1, n + 2)] + [(-1, 0, ())]
        _record_identity(rep, "sum Y_m* Y_m = 1", unit_terms, L, n, q, N, angles, tol)
        by_slot = sorted(range(1, n + 2), key=gens.slot)
        for a, b in itertools.combinations(by_slot, 2):
            terms = [(1, 0, (f"Y{a}", f"Y{b}")), (-1, 1, (f"Y{b}", f"Y{a}"))]
            _record_identity(rep, f"Y{a} Y{b} = q Y{b} Y{a}", terms, L, n, q, N, angles, tol)
    return rep


# ---------------------------------------------------------------------------
# restriction lemma


def _atoms_below(f: AlgebraElement, i: int) -> bool:
    """No coefficient atom on a slot >= i and no shift in slots >= i."""
    for (_, x), p in f.terms.items():
        if any(s >= i for s in p.slots()):
            return False
        if any(x[i - 1:]):
            return False
    return True


def check_lemma_restrictions(n: int, q: float = 0.5, L: int = 3) -> CheckReport:
    if n < 2:
        raise ValueError("the restriction lemma needs n >= 2")
    rep = CheckReport("lemma_restrictions", {"n": n, "q": q, "L": L})
    gens = build_generators(n, q)
    words = Words(gens.letters(), n)
    all_words = words.all(L)
    with rep.timed():
        bad = [(i, m) for i in range(1, n) for m in range(1, n + 2 - i)
               if not rho_face(gens.Y[m - 1], i).is_zero()]
        rep.record("(a) rho_i(Y_m) = 0 for m <= n+1-i", not bad, witness=bad or None)

        bad = []
        for i in range(1, n):
            got = rho_face(gens.Y[n + 1 - i], i)
            x = tuple(-1 if l == i else 0 for l in range(1, n + 1))
            want = AlgebraElement.single(n, 1, x, Prod(tuple(Pow(l) for l in range(1, i))), {i})
            if not equal(got, want):
                bad.append({"i": i, "got": got.serialize()})
        rep.record("(b) rho_i(Y_{n+2-i}) = circle mode (-1 in slot i) times gamma diagonal",
                   not bad, witness=bad or None)

        bad = [(i, m) for i in range(1, n) for m in range(n + 3 - i, n + 2)
               if not _atoms_below(rho_face(gens.Y[m - 1], i), i)]
        rep.record("(c) rho_i(Y_m) = a (x) 1 for m > n+2-i", not bad, witness=bad or None)

        bad = []
        for i in range(1, n):
            for w in all_words:
                a = rho_face(words.element(w), i)
                if not equal(pi_pullback_ni(rho_face(a, n), i), a):
                    bad.append({"i": i, "word": word_name(w), "map": "pi_ni rho_ni"})
                b = rho_face(a, n)
                if not equal(rho_face(pi_pullback_ni(b, i), n), b):
                    bad.append({"i": i, "word": word_name(w), "map": "rho_ni pi_ni"})
        rep.record("(d) pi_ni rho_ni = Id and rho_ni pi_ni = Id on restricted words",
                   not bad, witness=bad[:5] or None, words=len(all_words))

        bad = []
        for w in all_words:
            family = rho_boundary(words.element(w))
            a = rho_n_boundary(family)
            if not equal(rho_n_boundary(pi_pullback_n_boundary(a)), a):
                bad.append({"word": word_name(w), "map": "rho pi"})
            back = pi_pullback_n_boundary(rho_n_boundary(family))
            if not all(equal(u, v) for u, v in zip(back, family)):
                bad.append({"word": word_name(w), "map": "pi rho"})
        rep.record("(e) rho_{n,dF} and pi_{n,dF} are mutually inverse on restricted words",
                   not bad, witness=bad[:5] or None, words=len(all_words))
    return rep


# ---------------------------------------------------------------------------
# theorem: support and invariance


def _window_scan(f: AlgebraElement, q: float, N: int) -> int:
    """Count window points violating support in F~_n or ~-invariance numerically."""
    n = f.n
    units = list(itertools.product(list(range(N + 1)) + [INF], repeat=n))
    W = np.array(units, dtype=float)
    index = {u: k for k, u in enumerate(units)}
    canon = np.array([index[gp.canonical_unit(u)] for u in units])
    bad = 0
    for (z, x), p in f.terms.items():
        vals = p.eval_grid(W, q)
        for k, u in enumerate(units):
            if any(ui != INF and ui + xi < 0 for ui, xi in zip(u, x)):
                continue
            g = gp.GroupoidElement(z, x, u)
            if not gp.in_ftilde(g):
                bad += abs(vals[k]) > COHERENCE_TOL
            elif abs(vals[k] - vals[canon[k]]) > COHERENCE_TOL:
                bad += 1
    return int(bad)


def check_phi_conjugation(n: int, q: float = 0.5) -> CheckReport:
    """rho_n of the n-system equals the phi_*-transport of the (n-1)-system."""
    rep = CheckReport("phi_conjugation", {"n": n, "q": q})
    if n < 2:
        raise ValueError("phi conjugation compares n with n-1 >= 1")
    big = build_generators(n, q)
    small = build_generators(n - 1, q)
    with rep.timed():
        bad = []
        if not rho_face(big.Y[0], n).is_zero():
            bad.append("rho_n(Y1) != 0")
        for m in range(1, n + 1):
            moved = phi_pushforward(embed_into_face_n(small.Y[m - 1]))
            if not equal(moved, rho_face(big.Y[m], n)):
                bad.append(f"phi(Y{m} of n-1) != rho_n(Y{m + 1})")
        rep.record("rho_n(Y_{m+1}) = phi(embedded Y_m of the (n-1)-system); rho_n(Y_1) = 0",
                   not bad, witness=bad or None)
    return rep


def check_theorem_support(n: int, q: float = 0.5, L: int = 4, scan_N: int = 3) -> CheckReport:
    rep = CheckReport("theorem_support", {"n": n, "q": q, "L": L})
    gens = build_generators(n, q)
    words = Words(gens.letters(), n)
    all_words = words.all(L)
    with rep.timed():
        sup_bad, sim_bad, unknown = [], [], []
        for w in all_words:
            f = words.element(w)
            s = support_subset_ftilde(f)
            if s.status is not CertStatus.CERTIFIED:
                (unknown if s.status is CertStatus.UNKNOWN else sup_bad).append(word_name(w))
                continue
            c = sim_invariant(f)
            if c.status is not CertStatus.CERTIFIED:
                (unknown if c.status is CertStatus.UNKNOWN else sim_bad).append(word_name(w))
        rep.record("words supported in F~_n", not sup_bad and not unknown,
                   witness=sup_bad[:5] or None, words=len(all_words), unknown=unknown[:5])
        rep.record("words invariant under ~", not sim_bad and not unknown,
                   witness=sim_bad[:5] or None, words=len(all_words))

        scan = sum(_window_scan(words.element(w), q, scan_N) for w in all_words)
        rep.record("window scan agrees with certificates", scan == 0, mismatches=scan, N=scan_N)

        neg = support_subset_ftilde(t_only(n))
        rep.record("negative control: t-only element refuted",
                   neg.status is CertStatus.REFUTED, witness=neg.to_json())
        crafted = AlgebraElement.single(n, 0, (0,) * n, Pow(n)) if n >= 2 else None
        if crafted is not None:
            c = sim_invariant(crafted)
            rep.record("negative control: class-splitting element refuted",
                       c.status is CertStatus.REFUTED, witness=c.to_json())
    if n >= 2:
        rep.merge(check_phi_conjugation(n, q))
    return rep


# ---------------------------------------------------------------------------
# set identities from the induction step


def check_set_identities(n: int, z_max: int = 3, x_max: int = 3, N: int = 3) -> CheckReport:
    if n < 2:
        raise ValueError("set identities need n >= 2")
    rep = CheckReport("set_identities", {"n": n, "z_max": z_max, "x_max": x_max, "N": N})
    with rep.timed():
        window = list(gp.enumerate_window(n, z_max, x_max, N))
        in_window = set(window)
        prime = {g for g in window if gp.in_ftilde_prime(g)}
        image = set()
        for h in gp.enumerate_window(n - 1, z_max, x_max, N):
            if gp.in_ftilde(h):
                g = gp.phi_star(gp.embed_lower(h))
                if g in in_window:
                    image.add(g)
        mism_a = len(prime ^ image)
        rep.record("F~'_{n-1} = phi_*(F~_{n-1})", mism_a == 0, mismatches=mism_a,
                   members=len(prime), witness=[g.to_json() for g in sorted(prime ^ image, key=gp.GroupoidElement.sort_key)[:3]] or None)

        mism_b = 0
        boundary = 0
        examples = []
        for g in window:
            if not gp.in_boundary(g.w):
                continue
            boundary += 1
            lhs = gp.in_ftilde_doubleprime(g)
            rhs = gp.in_ftilde_prime(gp.pi_n_boundary(g))
            if lhs != rhs:
                mism_b += 1
                if len(examples) < 3:
                    examples.append(g.to_json())
        rep.record("F~''_{n-1} = pi_{n,dF}^{-1}(F~'_{n-1})", mism_b == 0, mismatches=mism_b,
                   boundary_elements=boundary, witness=examples or None)

        mism_c = sum(
            1 for g in window
            if gp.in_ftilde_doubleprime(g) and not gp.in_ftilde_doubleprime(gp.canonicalize(g))
        )
        rep.record("canonicalize maps F~''_{n-1} into itself", mism_c == 0, mismatches=mism_c)
    return rep


# ---------------------------------------------------------------------------
# exactness


def _finite_block_span_residual(q: float, N: int, length: int, z_modes=(-1, 0, 1)) -> dict:
    """Worst least-squares residual of finite-block matrix units per z-mode (n = 1).

    Spans are grown exactly: S_{k+1} = S_k + sum_letters letter * S_k, on a
    window large enough that columns 0..N are untouched by truncation.
    """
    gens = build_generators(1, q)
    big = ReprConfig(1, N + length, q)
    finite_cols = np.arange(N + 1)
    letters = []
    for name, el in gens.letters().items():
        z = next(iter(el.terms))[0]
        letters.append((z, to_matrix(el, big).matrix))
    start = {0: [identity(big).matrix[:, finite_cols].toarray()]}
    spans = {0: _orth(start[0])}
    frontier = dict(spans)
    for _ in range(length):
        new_frontier = {}
        for z, basis in frontier.items():
            for dz, M in letters:
                cand = [np.asarray(M @ b) for b in basis]
                tgt = z + dz
                merged, added = _extend(spans.get(tgt, []), cand)
                spans[tgt] = merged
                if added:
                    new_frontier.setdefault(tgt, []).extend(added)
        frontier = new_frontier
        if not frontier:
            break
    out = {}
    for z in z_modes:
        basis = spans.get(z, [])
        if not basis:
            out[z] = 1.0
            continue
        A = np.array([b[: N + 1, :].ravel() for b in basis]).T
        worst = 0.0
        for k in range(N + 1):
            for l in range(N + 1):
                e = np.zeros((N + 1, N + 1))
                e[k, l] = 1
                coef, *_ = np.linalg.lstsq(A, e.ravel(), rcond=None)
                worst = max(worst, float(np.linalg.norm(A @ coef - e.ravel())))
        out[z] = worst
    return out


_SPAN_TOL = 1e-11


def _orth(vectors):
    basis, _ = _extend([], vectors)
    return basis


def _extend(basis, vectors):
    """Gram-Schmidt ``vectors`` into ``basis``; returns (basis, newly added)."""
    basis = list(basis)
    added = []
    for v in vectors:
        v = np.array(v, dtype=complex)
        scale = np.linalg.norm(v)
        if scale == 0:
            continue
        for _ in range(2):
            for b in basis:
                v = v - np.vdot(b, v) * b
        nv = np.linalg.norm(v)
        if nv > _SPAN_TOL * max(scale, 1.0):
            v = v / nv
            basis.append(v)
            added.append(v)
    return basis, added


def check_exactness(n: int, q: float = 0.5, N: int = 2, L: int = 3, richness_length: int = 8) -> CheckReport:
    rep = CheckReport("exactness", {"n": n, "q": q, "N": N, "L": L, "richness_length": richness_length})
    gens = build_generators(n, q)
    letters = gens.letters()
    words = Words(letters, n)
    with rep.timed():
        y1y1 = gens.Y[0] * letters["Y1*"]
        cert = vanishes_on_boundary(y1y1)
        cfg = ReprConfig(n, max(N, 2), q)
        M = to_matrix(y1y1, cfg).toarray()
        bnd = np.flatnonzero(np.isinf(cfg.units()).any(axis=1))
        numeric = float(np.abs(M[np.ix_(bnd, bnd)]).max()) if bnd.size else 0.0
        rep.record("Y1 Y1* lies in the boundary-vanishing ideal",
                   cert.certified and numeric <= COHERENCE_TOL, numeric, status=str(cert.status))

        all_words = words.all(L)
        bad = [word_name(w) for w in all_words if not boundary_compatible(rho_boundary(words.element(w)))]
        rep.record("boundary families of words agree on face overlaps", not bad,
                   witness=bad[:5] or None, words=len(all_words))
        if n >= 2:
            fam = list(rho_boundary(AlgebraElement.unit(n)))
            fam[0] = AlgebraElement.zero(n, {1})
            rep.record("negative control: family with a zeroed face is incompatible",
                       not boundary_compatible(fam))

        res = _finite_block_span_residual(q, 2, richness_length)
        worst = max(res.values())
        rep.record("ideal richness: finite-block matrix units in the word span (n=1, N=2)",
                   worst < RICHNESS_TOL, worst, per_z_mode={str(k): v for k, v in sorted(res.items())},
                   word_length=richness_length)

        neg = vanishes_on_boundary(gens.Y[1])
        rep.record("negative control: Y2 survives on the boundary", neg.status is CertStatus.REFUTED,
                   witness=neg.to_json())
        if n >= 2:
            e = AlgebraElement.unit(n)
            for m in range(1, n + 2):
                e = e - gens.Y[m - 1] * letters[f"Y{m}*"]
            neg = vanishes_on_boundary(e)
            rep.record("negative control: 1 - sum Y_m Y_m* survives on the boundary",
                       neg.status is CertStatus.REFUTED, witness=neg.to_json())
    return rep


# ---------------------------------------------------------------------------
# q-independence proxy


def _support_pattern(elems, cfg: ReprConfig) -> list:
    W = cfg.units()
    pattern = []
    for w, f in elems:
        shifts = tuple(s for s, p in f.terms.items() if np.abs(p.eval_grid(W, cfg.q)).max() > 0)
        pattern.append((word_name(w), shifts))
    return pattern


def word_rank(n: int, q: float, L: int, N: int, theta=DEFAULT_ANGLES[1], phi=DEFAULT_ANGLES[2]):
    gens = build_generators(n, q)
    words = Words(gens.letters(), n)
    cfg = ReprConfig(n, N, q, theta, (phi,) * n)
    elems = [(w, words.element(w)) for w in words.all(L)]
    mats = [to_matrix(f, cfg) for _, f in elems]
    mask = interior_mask(cfg, min(L, N // 2))
    sv = gram_singular_values(mats, mask)
    rank = gram_rank(mats, mask, GRAM_TOL)
    kept = float(sv[rank - 1] / sv[0]) if rank else 0.0
    dropped = float(sv[rank] / sv[0]) if rank < sv.size else 0.0
    return rank, _support_pattern(elems, cfg), (kept, dropped)


def check_q_independence_proxy(n: int, q1: float = 0.3, q2: float = 0.7, L: int = 3, N: int = 8) -> CheckReport:
    if q1 == q2:
        raise ValueError("q1 and q2 must differ")
    rep = CheckReport("q_independence_proxy", {"n": n, "q1": q1, "q2": q2, "L": L, "N": N})
    with rep.timed():
        r1, p1, gap1 = word_rank(n, q1, L, N)
        r2, p2, gap2 = word_rank(n, q2, L, N)
        rep.record("Gram ranks of word spans agree", r1 == r2, rank_q1=r1, rank_q2=r2,
                   gap_q1=gap1, gap_q2=gap2)
        rep.record("support patterns agree", p1 == p2, words=len(p1))
    return rep


# ---------------------------------------------------------------------------
# quotient groupoid


def _random_unit(rng: LCG, n: int, N: int) -> tuple:
    return tuple(INF if rng.randint(0, N + 1) == N + 1 else rng.randint(0, N) for _ in range(n))


def _random_element_from(rng: LCG, w: tuple, z_max: int, x_max: int) -> gp.GroupoidElement:
    """A random element of F~_n with source ``w``."""
    n = len(w)
    z = rng.randint(-z_max, z_max)
    first = gp.first_inf(w)
    x = []
    for j in range(n):
        if first is not None and j + 1 == first:
            x.append(-z - sum(x))
        elif first is not None and j + 1 > first:
            x.append(0)
        else:
            lo = -min(x_max, w[j]) if w[j] != INF else -x_max
            x.append(rng.randint(lo, x_max))
    g = gp.make_element(z, x, w)
    assert gp.in_ftilde(g), g
    return g


def _random_representative(rng: LCG, cls: gp.CanonicalClass, N: int) -> gp.GroupoidElement:
    """Unsaturate the entries after the first ``inf`` at random."""
    g = cls.rep
    first = gp.first_inf(g.w)
    if first is None:
        return g
    w = tuple(v if j < first else (INF if rng.randint(0, N + 1) == N + 1 else rng.randint(0, N))
              for j, v in enumerate(g.w))
    return gp.make_element(g.z, g.x, w)


def check_quotient_soundness(n: int, samples: int = 10_000, seed: int = 0,
                             z_max: int = 2, x_max: int = 2, N: int = 3) -> CheckReport:
    rep = CheckReport("quotient_soundness", {"n": n, "samples": samples, "seed": seed,
                                            "z_max": z_max, "x_max": x_max, "N": N})
    rng = LCG(seed)
    fails = {"associativity": 0, "inverse": 0, "representatives": 0, "closure": 0}
    first_fail = {}
    boundary_samples = 0
    with rep.timed():
        for _ in range(samples):
            c = _random_element_from(rng, _random_unit(rng, n, N), z_max, x_max)
            b = _random_element_from(rng, c.range, z_max, x_max)
            a = _random_element_from(rng, b.range, z_max, x_max)
            A, B, C = (gp.CanonicalClass.of(g) for g in (a, b, c))
            boundary_samples += gp.in_boundary(c.w)

            ab = gp.compose_classes(A, B)
            lhs = gp.compose_classes(ab, C)
            rhs = gp.compose_classes(A, gp.compose_classes(B, C))
            if lhs != rhs:
                fails["associativity"] += 1
                first_fail.setdefault("associativity", [a, b, c])

            ok = (gp.compose_classes(A, A.inverse()).rep == gp.unit(A.range)
                  and gp.compose_classes(A.inverse(), A).rep == gp.unit(A.source))
            if not ok:
                fails["inverse"] += 1
                first_fail.setdefault("inverse", [a])

            ra, rb = _random_representative(rng, A, N), _random_representative(rng, B, N)
            if gp.compose_classes(ra, rb) != ab:
                fails["representatives"] += 1
                first_fail.setdefault("representatives", [ra, rb])

            if not (gp.in_ftilde(gp.compose(a, b)) and gp.in_ftilde(gp.inverse(a))):
                fails["closure"] += 1
                first_fail.setdefault("closure", [a, b])
        for key, label in [
            ("associativity", "class composition is associative"),
            ("inverse", "class inverse laws"),
            ("representatives", "class product independent of representatives"),
            ("closure", "F~_n closed under composition and inverse"),
        ]:
            rep.record(label, fails[key] == 0, witness=first_fail.get(key), failures=fails[key],
                       samples=samples, boundary_samples=boundary_samples)
    return rep


# ---------------------------------------------------------------------------
# oracle coherence


def random_element(rng: LCG, n: int, max_terms: int = 3, max_shift: int = 2) -> AlgebraElement:
    """A random element with small integer shifts and random coefficient atoms."""
    total = AlgebraElement.zero(n)
    for _ in range(rng.randint(1, max_terms)):
        z = rng.randint(-1, 1)
        x = tuple(rng.randint(-max_shift, max_shift) for _ in range(n))
        factors = [Const(rng.randint(1, 3) * (1 if rng.randint(0, 1) else -1))]
        for _ in range(rng.randint(0, 3)):
            j = rng.randint(1, n)
            kind = rng.randint(0, 2)
            if kind == 0:
                factors.append(Pow(j, rng.randint(1, 2), rng.randint(-1, 1)))
            elif kind == 1:
                factors.append(Sqrt(j, rng.randint(-1, 1)))
            else:
                factors.append(Ind(j, rng.randint(0, 2)))
        total = total + AlgebraElement.single(n, z, x, Prod(tuple(factors)))
    return total


def _random_angle(rng: LCG) -> float:
    return rng.randint(0, 6) * 2 * math.pi / 7


def _witness_entry(f: AlgebraElement, g: gp.GroupoidElement, q: float) -> complex:
    """The matrix route to ``f(g)``.

    A matrix entry over ``inf`` slots sums every circle mode, so the mode of
    ``g`` is recovered by a discrete Fourier transform over sampled angles
    (exact once the grid exceeds the spread of modes in ``f``).
    """
    finite = [v for v in tuple(g.w) + tuple(g.range) if v != INF]
    N = max([1] + [int(v) for v in finite])
    inf_slots = [j for j, v in enumerate(g.w) if v == INF]
    spread = max([abs(g.z)] + [abs(z) for z, _ in f.terms]
                 + [abs(x[j]) for _, x in f.terms for j in inf_slots]
                 + [abs(g.x[j]) for j in inf_slots])
    K = 2 * spread + 1
    grid = [2 * math.pi * k / K for k in range(K)]
    total = 0j
    for ks in itertools.product(range(K), repeat=1 + len(inf_slots)):
        theta = grid[ks[0]]
        phi = [0.0] * f.n
        for j, k in zip(inf_slots, ks[1:]):
            phi[j] = grid[k]
        cfg = ReprConfig(f.n, N, q, theta, tuple(phi))
        entry = to_matrix(f, cfg).matrix[cfg.index(g.range), cfg.index(g.w)]
        phase = g.z * theta + sum(g.x[j] * phi[j] for j in inf_slots)
        total += entry * complex(math.cos(phase), -math.sin(phase))
    return total / K ** (1 + len(inf_slots))


def _refuted_controls(rng: LCG, samples: int) -> list:
    """Certificates expected (or found) to be Refuted, with their elements."""
    out = []
    for n in (1, 2, 3):
        out.append(("t-only support", t_only(n), support_subset_ftilde(t_only(n))))
        gens = build_generators(n, 0.5)
        out.append((f"Y2 on boundary (n={n})", gens.Y[1], vanishes_on_boundary(gens.Y[1])))
    for n in (2, 3):
        crafted = AlgebraElement.single(n, 0, (0,) * n, Pow(n))
        out.append((f"class-splitting (n={n})", crafted, sim_invariant(crafted)))
    for k in range(samples):
        f = random_element(rng, rng.randint(1, 2))
        cert = support_subset_ftilde(f)
        if cert.status is CertStatus.CERTIFIED:
            cert = vanishes_on_boundary(f)
        if cert.status is CertStatus.REFUTED:
            out.append((f"random element {k}", f, cert))
    return out


def check_oracle_coherence(samples: int = 1000, seed: int = 0, N: int = 8,
                           reports=()) -> CheckReport:
    """Symbolic and numeric routes must agree.

    * interior agreement of convolution and adjoint on random pairs;
    * every Refuted witness is a nonzero matrix entry with the reported value;
    * no identity in ``reports`` is symbolically zero but numerically large.
    """
    rep = CheckReport("oracle_coherence", {"samples": samples, "seed": seed, "N": N})
    rng = LCG(seed)
    with rep.timed():
        worst_conv = worst_adj = 0.0
        witness = None
        for k in range(samples):
            n = rng.randint(1, 2)
            f, g = random_element(rng, n), random_element(rng, n)
            B = max(f.shift_bound(), g.shift_bound())
            q = (0.3, 0.5, 0.9)[rng.randint(0, 2)]
            cfg = ReprConfig(n, max(N, 2 * B), q, _random_angle(rng),
                             tuple(_random_angle(rng) for _ in range(n)))
            cols = interior_mask(cfg, B)
            Mf, Mg = to_matrix(f, cfg), to_matrix(g, cfg)
            r = column_residual(to_matrix(f * g, cfg), Mf @ Mg, cols)
            if r > worst_conv:
                worst_conv = r
                if r > SYMBOLIC_NUMERIC_TOL:
                    witness = witness or {"sample": k, "f": f.serialize(), "g": g.serialize()}
            A = to_matrix(adjoint(f), cfg).matrix - Mf.H.matrix
            a = A[cols][:, cols]
            worst_adj = max(worst_adj, float(abs(a).max()) if a.nnz else 0.0)
        rep.record("interior agreement of convolution", worst_conv < SYMBOLIC_NUMERIC_TOL,
                   worst_conv, witness, pairs=samples)
        rep.record("interior agreement of adjoint", worst_adj < SYMBOLIC_NUMERIC_TOL, worst_adj,
                   elements=samples)

        bad = []
        controls = _refuted_controls(rng, samples // 10)
        worst = 0.0
        for name, f, cert in controls:
            if cert.status is not CertStatus.REFUTED:
                bad.append({"control": name, "status": str(cert.status)})
                continue
            for g, v in zip(cert.witness, cert.values):
                entry = _witness_entry(f, g, cert.q)
                worst = max(worst, abs(entry - v))
                if abs(entry - v) > COHERENCE_TOL:
                    bad.append({"control": name, "witness": g.to_json(), "matrix": entry, "symbolic": v})
            vals = cert.values
            separated = abs(vals[0] - vals[1]) if len(vals) == 2 else abs(vals[0])
            if separated <= COHERENCE_TOL:
                bad.append({"control": name, "reason": "witness values do not separate"})
        rep.record("Refuted witnesses confirmed by matrix entries", not bad, worst,
                   bad[:5] or None, refuted=len(controls))

        incoherent = []
        identities = 0
        for report in reports:
            for r in report.results:
                if "symbolic_zero" not in r.details:
                    continue
                identities += 1
                if r.details["symbolic_zero"] and (r.residual or 0.0) > COHERENCE_TOL:
                    incoherent.append(f"{report.title}: {r.name}")
        rep.record("no symbolically zero identity is numerically nonzero", not incoherent,
                   witness=incoherent or None, identities=identities)
    return rep
