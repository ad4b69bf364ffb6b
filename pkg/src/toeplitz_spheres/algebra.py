"""The convolution *-algebra of band-limited functions on F^n.

An :class:`AlgebraElement` is a finite map from shifts ``(z, x)`` to
coefficients (:class:`~toeplitz_spheres.coeffs.Poly`) in the source unit
``w``: the function takes the value ``c_{(z,x)}(w)`` at the groupoid element
``(z, x, w)``.  Elements may live on a face ``F_S`` (all slots in ``S`` pinned
to ``inf``); there the shift in a pinned slot is a circle mode.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .coeffs import INF, Ind, Poly, find_nonzero, to_poly, vanishes
from .groupoid import (
    DomainError,
    GroupoidElement,
    make_element,
    saturate,
    slot_condition,
)


def _guard(x: Sequence[int], face) -> Poly:
    g = Poly.const(1)
    for l, xl in enumerate(x, start=1):
        if xl < 0 and l not in face:
            g = g * to_poly(Ind(l, -xl))
    return g


class AlgebraElement:
    """Immutable element of C*(F^n) (or of C*(F^n|_{F_S}) when ``face`` is nonempty)."""

    __slots__ = ("n", "face", "terms")

    def __init__(self, n: int, terms: Mapping | None = None, face=()):
        self.n = int(n)
        self.face = frozenset(face)
        if any(not 1 <= i <= self.n for i in self.face):
            raise ValueError(f"face {sorted(self.face)} outside 1..{self.n}")
        clean = {}
        for (z, x), c in (terms or {}).items():
            x = tuple(int(v) for v in x)
            if len(x) != self.n:
                raise ValueError(f"shift {x} has wrong length for n={self.n}")
            p = to_poly(c)
            if self.face:
                p = p.restrict(self.face)
            p = p * _guard(x, self.face)
            if p and not vanishes(p):
                clean[(int(z), x)] = p
        self.terms = dict(sorted(clean.items()))

    @classmethod
    def unit(cls, n: int, face=()) -> "AlgebraElement":
        return cls(n, {(0, (0,) * n): 1}, face)

    @classmethod
    def zero(cls, n: int, face=()) -> "AlgebraElement":
        return cls(n, {}, face)

    @classmethod
    def single(cls, n: int, z: int, x: Sequence[int], coeff, face=()) -> "AlgebraElement":
        return cls(n, {(z, tuple(x)): coeff}, face)

    # -------------------------------------------------------------------
    def _like(self, terms) -> "AlgebraElement":
        return AlgebraElement(self.n, terms, self.face)

    def _check(self, other: "AlgebraElement"):
        if not isinstance(other, AlgebraElement):
            raise TypeError(f"expected AlgebraElement, got {type(other).__name__}")
        if other.n != self.n or other.face != self.face:
            raise ValueError(
                f"incompatible elements: n={self.n}/{other.n}, face={sorted(self.face)}/{sorted(other.face)}"
            )

    def __add__(self, other):
        self._check(other)
        terms = dict(self.terms)
        for s, c in other.terms.items():
            terms[s] = terms[s] + c if s in terms else c
        return self._like(terms)

    def __neg__(self):
        return self._like({s: -c for s, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c=1, qexp: int = 0) -> "AlgebraElement":
        """Multiply by the scalar ``c * q**qexp``."""
        return self._like({s: p.scale(c, qexp) for s, p in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            return convolve(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __eq__(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        return self.n == other.n and self.face == other.face and self.terms == other.terms

    def __hash__(self):
        return hash((self.n, self.face, tuple(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def shifts(self) -> list:
        return list(self.terms)

    def shift_bound(self) -> int:
        """Largest ``|x_j|`` over the finite slots of all shifts."""
        return max(
            (abs(v) for (_, x) in self.terms for j, v in enumerate(x, 1) if j not in self.face),
            default=0,
        )

    def coefficient(self, z: int, x: Sequence[int]) -> Poly:
        return self.terms.get((z, tuple(x)), Poly.zero())

    def value(self, g: GroupoidElement, q: float) -> complex:
        """The function value at the groupoid element ``g``."""
        if any(g.w[i - 1] != INF for i in self.face):
            raise DomainError(f"{g} does not lie over face {sorted(self.face)}")
        return self.coefficient(g.z, g.x).eval(g.w, q)

    def serialize(self) -> str:
        """Deterministic text form: one ``z x1,..,xn : coefficient`` line per shift."""
        head = f"AlgebraElement n={self.n} face={','.join(map(str, sorted(self.face))) or '-'}"
        lines = [head]
        for (z, x), p in self.terms.items():
            lines.append(f"{z} {','.join(map(str, x))} : {p.render()}")
        return "\n".join(lines) + "\n"

    def __repr__(self) -> str:
        body = "; ".join(f"({z},{x}) -> {p.render()}" for (z, x), p in self.terms.items())
        face = f", face={sorted(self.face)}" if self.face else ""
        return f"AlgebraElement(n={self.n}{face}: {body or '0'})"


def convolve(f: AlgebraElement, g: AlgebraElement) -> AlgebraElement:
    """``(f * g)(z, x, w) = sum f(z1, x1, w + x2) g(z2, x2, w)`` over ``x1 + x2 = x``.

    The intermediate unit ``w + x2`` must be valid, hence the ``Ind`` guard.
    """
    f._check(g)
    acc = {}
    for (z1, x1), c1 in f.terms.items():
        for (z2, x2), c2 in g.terms.items():
            c = (c1.shift(x2) * _guard(x2, f.face)) * c2
            if not c:
                continue
            s = (z1 + z2, tuple(a + b for a, b in zip(x1, x2)))
            acc[s] = acc[s] + c if s in acc else c
    return f._like(acc)


def adjoint(f: AlgebraElement) -> AlgebraElement:
    """``f*(g) = conj f(g^{-1})``."""
    terms = {}
    for (z, x), c in f.terms.items():
        nx = tuple(-v for v in x)
        terms[(-z, nx)] = c.shift(nx).conj()
    return f._like(terms)


def equal(f: AlgebraElement, g: AlgebraElement) -> bool:
    """Exact equality as functions (every coefficient difference provably zero)."""
    return (f - g).is_zero()


def rho_face(f: AlgebraElement, i: int) -> AlgebraElement:
    """Restriction to the face ``F_i`` (``w_i = inf``)."""
    if not 1 <= i <= f.n:
        raise IndexError(f"slot {i} out of range 1..{f.n}")
    return AlgebraElement(f.n, f.terms, f.face | {i})


def rho_boundary(f: AlgebraElement) -> tuple:
    """The boundary restriction as its family of face restrictions."""
    return tuple(rho_face(f, i) for i in range(1, f.n + 1))


def boundary_compatible(family: Sequence[AlgebraElement]) -> bool:
    """Whether ``rho_ij(a_j) == rho_ji(a_i)`` for all ``i < j``."""
    n = len(family)
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            if not equal(rho_face(family[j - 1], i), rho_face(family[i - 1], j)):
                return False
    return True


def pi_pullback_n_boundary(a: AlgebraElement) -> tuple:
    """Pull a function on ``F^n|_{F_n}`` back along ``w -> (w_1..w_{n-1}, inf)``.

    The result lives on the boundary and is returned as its family of face
    restrictions.
    """
    n = a.n
    if a.face != frozenset({n}):
        raise DomainError(f"expected an element on face {{{n}}}, got face {sorted(a.face)}")
    family = []
    for i in range(1, n):
        family.append(AlgebraElement(n, {s: c.restrict(i) for s, c in a.terms.items()}, {i}))
    family.append(a)
    return tuple(family)


def rho_n_boundary(family: Sequence[AlgebraElement]) -> AlgebraElement:
    """Restriction of a boundary function to the face ``F_n``."""
    return family[-1]


def pi_pullback_ni(a: AlgebraElement, i: int) -> AlgebraElement:
    """Pull a function on ``F_i cap F_n`` back to ``F_i`` along ``w_n -> inf``."""
    n = a.n
    if not 1 <= i < n:
        raise IndexError(f"pi_ni needs 1 <= i < n, got i={i}")
    if a.face != frozenset({i, n}):
        raise DomainError(f"expected an element on face {{{i},{n}}}, got {sorted(a.face)}")
    return AlgebraElement(n, a.terms, {i})


# ---------------------------------------------------------------------------
# certificates


class CertStatus(enum.Enum):
    CERTIFIED = "Certified"
    REFUTED = "Refuted"
    UNKNOWN = "Unknown"

    def __str__(self) -> str:
        return self.value


@dataclass
class Certificate:
    status: CertStatus
    witness: tuple = ()
    detail: str = ""
    values: tuple = field(default=())
    q: float | None = None

    @property
    def certified(self) -> bool:
        return self.status is CertStatus.CERTIFIED

    def to_json(self) -> dict:
        out = {"status": str(self.status)}
        if self.witness:
            out["witness"] = [g.to_json() for g in self.witness]
        if self.values:
            out["values"] = [[v.real, v.imag] for v in self.values]
        if self.q is not None:
            out["q"] = self.q
        if self.detail:
            out["detail"] = self.detail
        return out


def _witness_element(z, x, w):
    return make_element(z, x, w)


def support_subset_ftilde(f: AlgebraElement) -> Certificate:
    """Is ``f`` supported inside F~_n?

    For each shift and each slot whose condition fails for that shift, the
    coefficient restricted to ``w_i = inf`` must vanish identically.
    """
    pinned = {j: INF for j in f.face}
    for (z, x), c in f.terms.items():
        for i in range(1, f.n + 1):
            if slot_condition(z, x, i):
                continue
            r = c.restrict(i)
            if vanishes(r):
                continue
            hit = find_nonzero(r, f.n, {**pinned, i: INF})
            if hit is None:
                return Certificate(CertStatus.UNKNOWN, detail=f"shift ({z},{x}) slot {i}")
            w, q, v = hit
            g = _witness_element(z, x, w)
            return Certificate(
                CertStatus.REFUTED, (g,), "nonzero outside F~", (complex(v),), q
            )
    return Certificate(CertStatus.CERTIFIED)


def sim_invariant(f: AlgebraElement) -> Certificate:
    """Does ``f`` take equal values on ~-equivalent elements of F~_n?"""
    if not support_subset_ftilde(f).certified:
        raise ValueError("sim_invariant requires support inside F~_n")
    pinned = {j: INF for j in f.face}
    for (z, x), c in f.terms.items():
        for i in range(1, f.n + 1):
            if i == f.n or not slot_condition(z, x, i):
                continue
            d = c.restrict(i) - c.restrict(range(i, f.n + 1))
            if vanishes(d):
                continue
            hit = find_nonzero(d, f.n, {**pinned, i: INF})
            if hit is None:
                return Certificate(CertStatus.UNKNOWN, detail=f"shift ({z},{x}) slot {i}")
            w, q, _ = hit
            g = _witness_element(z, x, w)
            h = _witness_element(z, x, saturate(w, i))
            return Certificate(
                CertStatus.REFUTED,
                (g, h),
                "values differ across a class",
                (complex(c.eval(g.w, q)), complex(c.eval(h.w, q))),
                q,
            )
    return Certificate(CertStatus.CERTIFIED)


def vanishes_on_boundary(f: AlgebraElement) -> Certificate:
    """Is ``f`` in the kernel of the boundary restriction?"""
    for (z, x), c in f.terms.items():
        for i in range(1, f.n + 1):
            r = c.restrict(i)
            if vanishes(r):
                continue
            hit = find_nonzero(r, f.n, {i: INF})
            if hit is None:
                return Certificate(CertStatus.UNKNOWN, detail=f"shift ({z},{x}) slot {i}")
            w, q, v = hit
            return Certificate(
                CertStatus.REFUTED,
                (_witness_element(z, x, w),),
                f"survives on face {i}",
                (complex(v),),
                q,
            )
    return Certificate(CertStatus.CERTIFIED)


# ---------------------------------------------------------------------------
# transport between dimensions


def embed_into_face_n(f: AlgebraElement) -> AlgebraElement:
    """Regard a function on F^{n-1} as one on F^n|_{F_n} (``x_n = 0``, ``w_n = inf``)."""
    if f.face:
        raise DomainError("embedding expects an element on the full groupoid")
    return AlgebraElement(f.n + 1, {(z, x + (0,)): c for (z, x), c in f.terms.items()}, {f.n + 1})


def phi_pushforward(f: AlgebraElement) -> AlgebraElement:
    """Transport a function on F^n|_{F_n} along phi_*: ``x_n += -z - (x_1 + ... + x_{n-1})``."""
    if f.n not in f.face:
        raise DomainError("phi_* acts on functions over the face F_n")
    terms = {}
    for (z, x), c in f.terms.items():
        terms[(z, x[:-1] + (x[-1] - z - sum(x[:-1]),))] = c
    return AlgebraElement(f.n, terms, f.face)
