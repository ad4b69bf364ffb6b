"""Symbolic coefficient functions on the unit space.

A coefficient is a function of a unit ``w`` (entries may be ``inf``) and of the
deformation parameter ``q`` in ``(0, 1)``.  The grammar is deliberately tiny:

* ``Const(c)``            the complex constant ``c``
* ``QPow(k)``             ``q**k`` for an integer ``k``
* ``Pow(j, e, o)``        ``(q**(w_j + o))**e``, zero when ``w_j = inf``
* ``Sqrt(j, o)``          ``sqrt(1 - q**(2*(w_j + o)))``, one when ``w_j = inf``,
                          zero when ``w_j + o <= 0``
* ``SqrtConst(k)``        ``sqrt(1 - q**(2*k))``, zero when ``k <= 0``
* ``Ind(j, m)``           indicator of ``w_j >= m``
* ``Sum`` / ``Prod``      finite sums and products

Every expression has a normal form (:class:`Poly`): a sum of monomials, each a
coefficient times ``q**k`` times merged ``Pow`` atoms, square-free ``Sqrt`` and
``SqrtConst`` atoms and one ``Ind`` per slot.  Squares of square roots are
expanded (``Sqrt(j,o)**2 = Ind(j,-o) * (1 - q**(2o) q**(2 w_j))``) and an
``Ind`` that a ``Sqrt`` in the same monomial already forces is dropped.

Zero testing is exact, with ``q`` treated as an indeterminate: the unit space
is split slot by slot into the finitely many points below the largest
threshold and a tail on which every atom is analytic in ``q**w_j``.  On the
tail the monomial functions are linearly independent, so the test reduces to
the coefficients; points are handled by substitution.
"""

from __future__ import annotations

import enum
import itertools
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

INF = math.inf

PROBE_UNITS = (0, 1, 2, 5, INF)
PROBE_QS = (0.3, 0.5, 0.9)
NONZERO_TOL = 1e-9


class ZeroStatus(enum.Enum):
    PROVABLY_ZERO = "ProvablyZero"
    PROVABLY_NONZERO = "ProvablyNonzero"
    UNKNOWN = "Unknown"

    def __str__(self) -> str:
        return self.value


# ---------------------------------------------------------------------------
# expression trees


class Expr:
    """Base class of coefficient expressions; supports ``+``, ``-`` and ``*``."""

    def __add__(self, other):
        return Sum((self, as_expr(other)))

    def __radd__(self, other):
        return Sum((as_expr(other), self))

    def __sub__(self, other):
        return Sum((self, Prod((Const(-1), as_expr(other)))))

    def __rsub__(self, other):
        return Sum((as_expr(other), Prod((Const(-1), self))))

    def __mul__(self, other):
        return Prod((self, as_expr(other)))

    def __rmul__(self, other):
        return Prod((as_expr(other), self))

    def __neg__(self):
        return Prod((Const(-1), self))


@dataclass(frozen=True)
class Const(Expr):
    c: complex


@dataclass(frozen=True)
class QPow(Expr):
    k: int


@dataclass(frozen=True)
class Pow(Expr):
    slot: int
    exp: int = 1
    offset: int = 0

    def __post_init__(self):
        if self.exp < 1:
            raise ValueError("Pow exponent must be >= 1")
        if self.slot < 1:
            raise ValueError("slots are numbered from 1")


@dataclass(frozen=True)
class Sqrt(Expr):
    slot: int
    offset: int = 0

    def __post_init__(self):
        if self.slot < 1:
            raise ValueError("slots are numbered from 1")


@dataclass(frozen=True)
class SqrtConst(Expr):
    k: int


@dataclass(frozen=True)
class Ind(Expr):
    slot: int
    min: int

    def __post_init__(self):
        if self.slot < 1:
            raise ValueError("slots are numbered from 1")


@dataclass(frozen=True)
class Sum(Expr):
    terms: tuple


@dataclass(frozen=True)
class Prod(Expr):
    factors: tuple


def as_expr(v) -> Expr:
    if isinstance(v, Expr):
        return v
    if isinstance(v, Poly):
        return v.to_expr()
    if isinstance(v, (int, float, complex)):
        return Const(v)
    raise TypeError(f"cannot use {type(v).__name__} as a coefficient")


def _sqrt_value(w, o, q):
    if w == INF:
        return 1.0
    t = w + o
    if t <= 0:
        return 0.0
    return math.sqrt(1.0 - q ** (2 * t))


def eval_expr(e: Expr, w: Sequence, q: float) -> complex:
    """Evaluate an expression tree at the unit ``w``."""
    if isinstance(e, Const):
        return e.c
    if isinstance(e, QPow):
        return q ** e.k
    if isinstance(e, SqrtConst):
        return math.sqrt(1.0 - q ** (2 * e.k)) if e.k > 0 else 0.0
    if isinstance(e, (Pow, Sqrt, Ind)):
        if e.slot > len(w):
            raise IndexError(f"slot {e.slot} out of range for unit of length {len(w)}")
        v = w[e.slot - 1]
        if isinstance(e, Pow):
            return 0.0 if v == INF else q ** (e.exp * (v + e.offset))
        if isinstance(e, Sqrt):
            return _sqrt_value(v, e.offset, q)
        return 1.0 if v >= e.min else 0.0
    if isinstance(e, Sum):
        return sum((eval_expr(t, w, q) for t in e.terms), 0)
    if isinstance(e, Prod):
        out = 1
        for f in e.factors:
            out = out * eval_expr(f, w, q)
            if out == 0:
                return 0
        return out
    raise TypeError(e)


def shift(e: Expr, x: Sequence[int]) -> Expr:
    """The expression ``w -> e(w + x)``.

    A ``Sqrt`` pushed below its domain is paired with an ``Ind`` guard.
    """
    if isinstance(e, (Const, QPow, SqrtConst)):
        return e
    if isinstance(e, Pow):
        return Pow(e.slot, e.exp, e.offset + _dx(x, e.slot))
    if isinstance(e, Sqrt):
        o = e.offset + _dx(x, e.slot)
        if o < 0:
            return Prod((Sqrt(e.slot, o), Ind(e.slot, -o)))
        return Sqrt(e.slot, o)
    if isinstance(e, Ind):
        return Ind(e.slot, e.min - _dx(x, e.slot))
    if isinstance(e, Sum):
        return Sum(tuple(shift(t, x) for t in e.terms))
    if isinstance(e, Prod):
        return Prod(tuple(shift(f, x) for f in e.factors))
    raise TypeError(e)


def _dx(x, slot):
    if isinstance(x, Mapping):
        return x.get(slot, 0)
    return x[slot - 1] if slot <= len(x) else 0


def restrict_inf(e: Expr, i: int) -> Expr:
    """Substitute ``w_i = inf``; the result has no slot-``i`` atom."""
    if isinstance(e, Pow):
        return Const(0) if e.slot == i else e
    if isinstance(e, (Sqrt, Ind)):
        return Const(1) if e.slot == i else e
    if isinstance(e, Sum):
        return Sum(tuple(restrict_inf(t, i) for t in e.terms))
    if isinstance(e, Prod):
        return Prod(tuple(restrict_inf(f, i) for f in e.factors))
    return e


# ---------------------------------------------------------------------------
# normal form


@dataclass(frozen=True, order=True)
class Monomial:
    qexp: int = 0
    pows: tuple = ()    # ((slot, E), ...) with E >= 1
    sqrts: tuple = ()   # ((slot, offset), ...), distinct
    inds: tuple = ()    # ((slot, m), ...) with m >= 1
    csqrts: tuple = ()  # (k, ...) distinct, k >= 1

    def slots(self) -> set:
        return {s for s, _ in self.pows} | {s for s, _ in self.sqrts} | {s for s, _ in self.inds}


def _canon(c, qexp, pows, sqrts, inds, csqrts):
    """Bring one raw product into normal form; returns ``[(coeff, Monomial), ...]``."""
    if c == 0:
        return []
    inds = {j: m for j, m in inds.items() if m > 0}
    _absorb(inds, sqrts)

    # (raw coefficient, qexp, pow dict, ind dict) pieces of the expansion
    pieces = [(c, qexp, dict(pows), dict(inds))]
    single_sqrts = []
    for (j, o), cnt in sqrts.items():
        a, b = divmod(cnt, 2)
        if b:
            single_sqrts.append((j, o))
        if a:
            factor = [(math.comb(a, r) * (-1) ** r, 2 * o * r, 2 * r) for r in range(a + 1)]
            new = []
            for pc, pk, pp, pi in pieces:
                gi = dict(pi)
                if -o > 0:
                    gi[j] = max(gi.get(j, 0), -o)
                for fc, fk, fe in factor:
                    np_ = dict(pp)
                    if fe:
                        np_[j] = np_.get(j, 0) + fe
                    new.append((pc * fc, pk + fk, np_, gi))
            pieces = new
    single_cs = []
    for k, cnt in csqrts.items():
        a, b = divmod(cnt, 2)
        if b:
            single_cs.append(k)
        if a:
            factor = [(math.comb(a, r) * (-1) ** r, 2 * k * r) for r in range(a + 1)]
            pieces = [
                (pc * fc, pk + fk, pp, pi) for pc, pk, pp, pi in pieces for fc, fk in factor
            ]

    sq = Counter(dict.fromkeys(single_sqrts, 1))
    out = []
    for pc, pk, pp, pi in pieces:
        if pc == 0:
            continue
        pi = dict(pi)
        _absorb(pi, sq)
        out.append(
            (
                pc,
                Monomial(
                    pk,
                    tuple(sorted((j, e) for j, e in pp.items() if e)),
                    tuple(sorted(single_sqrts)),
                    tuple(sorted(pi.items())),
                    tuple(sorted(single_cs)),
                ),
            )
        )
    return out


def _absorb(inds: dict, sqrts) -> None:
    # Sqrt(j, o) already vanishes for w_j <= -o, so Ind(j, m) with m <= 1 - o adds nothing
    for (j, o), cnt in sqrts.items():
        if cnt and j in inds and inds[j] <= 1 - o:
            del inds[j]


def _clean(c):
    if isinstance(c, complex) and c.imag == 0:
        c = c.real
    if isinstance(c, float) and c.is_integer():
        return int(c)
    return c


class Poly:
    """Normal form of a coefficient: an immutable map ``Monomial -> coefficient``."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping | None = None):
        clean = {}
        for m, c in (terms or {}).items():
            c = _clean(c)
            if c != 0:
                clean[m] = c
        self._terms = dict(sorted(clean.items()))
        self._hash = None

    # construction ------------------------------------------------------
    @staticmethod
    def _collect(raw: Iterable) -> "Poly":
        acc = defaultdict(int)
        for c, m in raw:
            acc[m] += c
        return Poly(acc)

    @classmethod
    def const(cls, c=1, qexp: int = 0) -> "Poly":
        return cls({Monomial(qexp): c})

    @classmethod
    def zero(cls) -> "Poly":
        return cls()

    @classmethod
    def from_expr(cls, e) -> "Poly":
        return to_poly(e)

    # mapping-like --------------------------------------------------------
    def items(self):
        return self._terms.items()

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self._terms == other._terms
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(tuple(self._terms.items()))
        return self._hash

    def slots(self) -> set:
        out = set()
        for m in self._terms:
            out |= m.slots()
        return out

    # arithmetic ----------------------------------------------------------
    def __add__(self, other):
        other = _as_poly(other)
        acc = defaultdict(int, self._terms)
        for m, c in other._terms.items():
            acc[m] += c
        return Poly(acc)

    __radd__ = __add__

    def __neg__(self):
        return Poly({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        other = _as_poly(other)
        raw = []
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                raw.extend(_canon(*_merge(c1 * c2, m1, m2)))
        return Poly._collect(raw)

    __rmul__ = __mul__

    def scale(self, c, qexp: int = 0) -> "Poly":
        return Poly({Monomial(m.qexp + qexp, m.pows, m.sqrts, m.inds, m.csqrts): v * c
                     for m, v in self._terms.items()})

    def conj(self) -> "Poly":
        return Poly({m: (c.conjugate() if isinstance(c, complex) else c)
                     for m, c in self._terms.items()})

    def shift(self, x) -> "Poly":
        """``w -> p(w + x)``; ``x`` is a sequence (slot 1 first) or a ``{slot: dx}`` map."""
        if not isinstance(x, Mapping):
            x = {j + 1: v for j, v in enumerate(x) if v}
        if not x:
            return self
        raw = []
        for m, c in self._terms.items():
            qexp = m.qexp + sum(e * x.get(j, 0) for j, e in m.pows)
            sq = Counter()
            inds = {}
            for j, o in m.sqrts:
                o2 = o + x.get(j, 0)
                sq[(j, o2)] += 1
                if o2 < 0:
                    inds[j] = max(inds.get(j, 0), -o2)
            for j, mm in m.inds:
                v = mm - x.get(j, 0)
                inds[j] = max(inds.get(j, 0), v)
            raw.extend(_canon(c, qexp, dict(m.pows), sq, inds, Counter(m.csqrts)))
        return Poly._collect(raw)

    def restrict(self, slots) -> "Poly":
        """Substitute ``w_j = inf`` for every ``j`` in ``slots``."""
        if isinstance(slots, int):
            slots = (slots,)
        slots = set(slots)
        out = {}
        for m, c in self._terms.items():
            if any(j in slots for j, _ in m.pows):
                continue
            key = Monomial(
                m.qexp,
                m.pows,
                tuple(s for s in m.sqrts if s[0] not in slots),
                tuple(s for s in m.inds if s[0] not in slots),
                m.csqrts,
            )
            out[key] = out.get(key, 0) + c
        return Poly(out)

    def substitute(self, j: int, k: int) -> "Poly":
        """Substitute the finite value ``w_j = k``."""
        raw = []
        for m, c in self._terms.items():
            qexp = m.qexp
            pows = {}
            for s, e in m.pows:
                if s == j:
                    qexp += e * k
                else:
                    pows[s] = e
            cs = Counter(m.csqrts)
            sq = Counter()
            dead = False
            for s, o in m.sqrts:
                if s == j:
                    if k + o <= 0:
                        dead = True
                        break
                    cs[k + o] += 1
                else:
                    sq[(s, o)] += 1
            if dead:
                continue
            inds = {}
            for s, mm in m.inds:
                if s == j:
                    if k < mm:
                        dead = True
                        break
                else:
                    inds[s] = mm
            if dead:
                continue
            raw.extend(_canon(c, qexp, pows, sq, inds, cs))
        return Poly._collect(raw)

    # evaluation ----------------------------------------------------------
    def eval(self, w: Sequence, q: float) -> complex:
        total = 0
        for m, c in self._terms.items():
            total += c * _mono_value(m, w, q)
        return total

    def eval_grid(self, W: np.ndarray, q: float) -> np.ndarray:
        """Vectorised evaluation; ``W`` has one unit per row, ``inf`` allowed."""
        W = np.asarray(W, dtype=float)
        out = np.zeros(W.shape[0], dtype=complex)
        with np.errstate(over="ignore", invalid="ignore"):
            for m, c in self._terms.items():
                v = np.full(W.shape[0], float(q) ** m.qexp)
                for j, e in m.pows:
                    col = W[:, j - 1]
                    v = v * np.where(np.isinf(col), 0.0, float(q) ** (e * np.where(np.isinf(col), 0.0, col)))
                for j, o in m.sqrts:
                    col = W[:, j - 1]
                    t = col + o
                    inner = 1.0 - float(q) ** (2 * np.where(np.isinf(t), 1.0, t))
                    v = v * np.where(np.isinf(col), 1.0, np.where(t > 0, np.sqrt(np.clip(inner, 0.0, None)), 0.0))
                for j, mm in m.inds:
                    v = v * (W[:, j - 1] >= mm)
                for k in m.csqrts:
                    v = v * math.sqrt(1.0 - q ** (2 * k))
                out += c * v
        return out

    # rendering -----------------------------------------------------------
    def to_expr(self) -> Expr:
        terms = []
        for m, c in self._terms.items():
            f = [Const(c)]
            if m.qexp:
                f.append(QPow(m.qexp))
            f += [Pow(j, e, 0) for j, e in m.pows]
            f += [Sqrt(j, o) for j, o in m.sqrts]
            f += [SqrtConst(k) for k in m.csqrts]
            f += [Ind(j, mm) for j, mm in m.inds]
            terms.append(Prod(tuple(f)))
        return Sum(tuple(terms))

    def render(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for m, c in self._terms.items():
            atoms = []
            if m.qexp:
                atoms.append(f"q^{m.qexp}" if m.qexp > 0 else f"q^({m.qexp})")
            atoms += [f"q^(w{j})" if e == 1 else f"q^({e}*w{j})" for j, e in m.pows]
            atoms += [f"sqrt(1-q^(2*(w{j}{o:+d})))" if o else f"sqrt(1-q^(2*w{j}))" for j, o in m.sqrts]
            atoms += [f"sqrt(1-q^{2 * k})" for k in m.csqrts]
            atoms += [f"[w{j}>={mm}]" for j, mm in m.inds]
            parts.append(_render_coeff(c, atoms))
        s = " + ".join(parts)
        return s.replace("+ -", "- ")

    def __repr__(self) -> str:
        return f"Poly({self.render()})"


def _render_coeff(c, atoms):
    if isinstance(c, complex):
        cs = f"({format(c.real, '.17g')}{format(c.imag, '+.17g')}j)"
    elif isinstance(c, float):
        cs = format(c, ".17g")
    else:
        cs = str(c)
    if not atoms:
        return cs
    body = "*".join(atoms)
    if cs == "1":
        return body
    if cs == "-1":
        return "-" + body
    return f"{cs}*{body}"


def _merge(c, m1: Monomial, m2: Monomial):
    pows = dict(m1.pows)
    for j, e in m2.pows:
        pows[j] = pows.get(j, 0) + e
    sq = Counter(m1.sqrts)
    sq.update(m2.sqrts)
    inds = dict(m1.inds)
    for j, mm in m2.inds:
        inds[j] = max(inds.get(j, 0), mm)
    cs = Counter(m1.csqrts)
    cs.update(m2.csqrts)
    return c, m1.qexp + m2.qexp, pows, sq, inds, cs


def _mono_value(m: Monomial, w, q) -> float:
    v = q ** m.qexp
    for j, e in m.pows:
        wj = w[j - 1]
        if wj == INF:
            return 0.0
        v *= q ** (e * wj)
    for j, o in m.sqrts:
        v *= _sqrt_value(w[j - 1], o, q)
    for j, mm in m.inds:
        if w[j - 1] < mm:
            return 0.0
    for k in m.csqrts:
        v *= math.sqrt(1.0 - q ** (2 * k))
    return v


def _as_poly(v) -> Poly:
    if isinstance(v, Poly):
        return v
    if isinstance(v, Expr):
        return to_poly(v)
    return Poly.const(v)


def to_poly(e) -> Poly:
    """Normal form of an expression tree."""
    if isinstance(e, Poly):
        return e
    if not isinstance(e, Expr):
        return Poly.const(e)
    if isinstance(e, Const):
        return Poly.const(e.c)
    if isinstance(e, QPow):
        return Poly.const(1, e.k)
    if isinstance(e, Pow):
        return Poly._collect(_canon(1, e.exp * e.offset, {e.slot: e.exp}, Counter(), {}, Counter()))
    if isinstance(e, Sqrt):
        return Poly._collect(_canon(1, 0, {}, Counter({(e.slot, e.offset): 1}), {}, Counter()))
    if isinstance(e, SqrtConst):
        if e.k <= 0:
            return Poly.zero()
        return Poly._collect(_canon(1, 0, {}, Counter(), {}, Counter({e.k: 1})))
    if isinstance(e, Ind):
        return Poly._collect(_canon(1, 0, {}, Counter(), {e.slot: e.min}, Counter()))
    if isinstance(e, Sum):
        out = Poly.zero()
        for t in e.terms:
            out = out + to_poly(t)
        return out
    if isinstance(e, Prod):
        out = Poly.const(1)
        for f in e.factors:
            out = out * to_poly(f)
            if not out:
                break
        return out
    raise TypeError(e)


def normalize(e) -> Expr:
    """The normal form of ``e`` as an expression tree."""
    return to_poly(e).to_expr()


# ---------------------------------------------------------------------------
# exact zero test


def _threshold(p: Poly, j: int) -> int:
    t = 0
    for m in p._terms:
        for s, mm in m.inds:
            if s == j:
                t = max(t, mm)
        for s, o in m.sqrts:
            if s == j:
                t = max(t, -o)
    return t


def vanishes(p: Poly) -> bool:
    """Exact decision: is ``p`` the zero function for every unit and every ``q``?"""
    if not p:
        return True
    slots = p.slots()
    if not slots:
        return False  # constants in normal form are independent
    j = min(slots)
    T = _threshold(p, j)
    for k in range(T):
        if not vanishes(p.substitute(j, k)):
            return False
    # on w_j >= T every Ind on slot j is 1 and the slot-j monomial functions are independent
    groups = defaultdict(dict)
    for m, c in p._terms.items():
        sig = (
            tuple(e for s, e in m.pows if s == j),
            tuple(o for s, o in m.sqrts if s == j),
        )
        rest = Monomial(
            m.qexp,
            tuple(a for a in m.pows if a[0] != j),
            tuple(a for a in m.sqrts if a[0] != j),
            tuple(a for a in m.inds if a[0] != j),
            m.csqrts,
        )
        g = groups[sig]
        g[rest] = g.get(rest, 0) + c
    return all(vanishes(Poly(g)) for g in groups.values())


def _candidate_units(p: Poly, n: int):
    yield from itertools.product(PROBE_UNITS, repeat=n)
    top = max([_threshold(p, j) for j in range(1, n + 1)] + [0]) + 3
    extra = tuple(range(top + 1)) + (8, 12, INF)
    if len(extra) ** n <= 20000:
        yield from itertools.product(extra, repeat=n)


def find_nonzero(p: Poly, n: int | None = None, fixed: Mapping | None = None):
    """A probe ``(w, q, value)`` where ``|p| > 1e-9``, or ``None``.

    ``fixed`` pins slots (1-based) to given values, e.g. ``{2: INF}``.
    """
    if n is None:
        n = max(p.slots() | {0})
    n = max(n, 1)
    fixed = dict(fixed or {})
    for w in _candidate_units(p, n):
        w = tuple(fixed.get(j + 1, v) for j, v in enumerate(w))
        for q in PROBE_QS:
            v = p.eval(w, q)
            if abs(v) > NONZERO_TOL:
                return w, q, v
    return None


def is_zero(e, n: int | None = None) -> ZeroStatus:
    p = _as_poly(e)
    if not p or vanishes(p):
        return ZeroStatus.PROVABLY_ZERO
    if find_nonzero(p, n) is not None:
        return ZeroStatus.PROVABLY_NONZERO
    return ZeroStatus.UNKNOWN


def equal(e1, e2, n: int | None = None) -> ZeroStatus:
    return is_zero(_as_poly(e1) - _as_poly(e2), n)
