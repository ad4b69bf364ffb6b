"""Combinatorics of the n-dimensional Toeplitz groupoid.

An element is a triple ``(z, x, w)`` with ``z`` an integer (the extra circle
coordinate), ``x`` an integer shift vector and ``w`` a unit in
``({0, 1, 2, ...} | {inf})^n``.  Its source is ``w`` and its range ``w + x``;
infinite coordinates absorb every shift.

Slots are numbered from 1, as faces are: ``in_face(w, 1)`` asks about the
first coordinate.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence, Union

INF = math.inf

ExtNat = Union[int, float]  # a nonnegative int, or INF
Unit = tuple  # tuple of ExtNat


class GroupoidError(ValueError):
    pass


class InvalidUnit(GroupoidError):
    pass


class NotComposable(GroupoidError):
    pass


class NotInSubgroupoid(GroupoidError):
    pass


class DomainError(GroupoidError):
    pass


def is_inf(v: ExtNat) -> bool:
    return v == INF


def ext_add(v: ExtNat, dx: int) -> ExtNat:
    """``v + dx`` on the extended naturals; raises when a finite result is negative."""
    if v == INF:
        return INF
    out = v + dx
    if out < 0:
        raise InvalidUnit(f"{v} + {dx} leaves the unit space")
    return out


def ext_str(v: ExtNat) -> str:
    return "inf" if v == INF else str(int(v))


def parse_ext(token) -> ExtNat:
    if isinstance(token, str):
        t = token.strip().lower()
        if t in ("inf", "oo", "∞", "infinity"):
            return INF
        return int(t)
    if token == INF:
        return INF
    return int(token)


def _check_unit(w: Sequence[ExtNat]) -> tuple:
    out = []
    for v in w:
        if v == INF:
            out.append(INF)
        elif isinstance(v, bool) or int(v) != v:
            raise InvalidUnit(f"unit coordinate {v!r} is not an extended natural")
        elif v < 0:
            raise InvalidUnit(f"unit coordinate {v} is negative")
        else:
            out.append(int(v))
    return tuple(out)


@dataclass(frozen=True, order=False)
class GroupoidElement:
    z: int
    x: tuple
    w: tuple

    @property
    def n(self) -> int:
        return len(self.w)

    @property
    def source(self) -> tuple:
        return self.w

    @property
    def range(self) -> tuple:
        return tuple(INF if wi == INF else wi + xi for wi, xi in zip(self.w, self.x))

    @property
    def is_unit(self) -> bool:
        return self.z == 0 and not any(self.x)

    def sort_key(self):
        return (self.z, self.x, tuple((1, 0) if v == INF else (0, v) for v in self.w))

    def to_json(self) -> dict:
        return {"z": self.z, "x": list(self.x), "w": [ext_str(v) for v in self.w]}

    def __str__(self) -> str:
        xs = ",".join(str(v) for v in self.x)
        ws = ",".join(ext_str(v) for v in self.w)
        return f"({self.z},({xs}),({ws}))"


def make_element(z: int, x: Sequence[int], w: Sequence[ExtNat]) -> GroupoidElement:
    """Build ``(z, x, w)``, checking that both ``w`` and ``w + x`` are units."""
    if len(x) != len(w):
        raise GroupoidError(f"shift has length {len(x)} but unit has length {len(w)}")
    w = _check_unit(w)
    x = tuple(int(v) for v in x)
    for wi, xi in zip(w, x):
        if wi != INF and wi + xi < 0:
            raise InvalidUnit(f"range coordinate {wi + xi} is negative")
    return GroupoidElement(int(z), x, w)


def unit(w: Sequence[ExtNat]) -> GroupoidElement:
    w = _check_unit(w)
    return GroupoidElement(0, (0,) * len(w), w)


def compose(g: GroupoidElement, h: GroupoidElement) -> GroupoidElement:
    """The product ``g h``; defined when ``source(g) == range(h)`` and keeps ``h``'s unit."""
    if g.n != h.n or g.source != h.range:
        raise NotComposable(f"source {g.source} of {g} differs from range {h.range} of {h}")
    return GroupoidElement(
        g.z + h.z, tuple(a + b for a, b in zip(g.x, h.x)), h.w
    )


def inverse(g: GroupoidElement) -> GroupoidElement:
    return GroupoidElement(-g.z, tuple(-v for v in g.x), g.range)


def _check_slot(i: int, n: int) -> None:
    if not 1 <= i <= n:
        raise IndexError(f"slot {i} out of range 1..{n}")


def in_face(w: Sequence[ExtNat], i: int) -> bool:
    _check_slot(i, len(w))
    return w[i - 1] == INF


def in_boundary(w: Sequence[ExtNat]) -> bool:
    return any(v == INF for v in w)


def slot_condition(z: int, x: Sequence[int], i: int) -> bool:
    """Whether shift ``(z, x)`` may sit over a unit with ``w_i = inf`` inside F~_n.

    That is ``x_i = -z - x_1 - ... - x_{i-1}`` and ``x_{i+1} = ... = x_n = 0``.
    """
    return x[i - 1] == -z - sum(x[: i - 1]) and not any(x[i:])


def in_ftilde(g: GroupoidElement) -> bool:
    return all(
        slot_condition(g.z, g.x, i + 1) for i, v in enumerate(g.w) if v == INF
    )


def first_inf(w: Sequence[ExtNat]):
    for i, v in enumerate(w):
        if v == INF:
            return i + 1
    return None


def saturate(w: Sequence[ExtNat], i: int) -> tuple:
    """Replace ``w_j`` by ``inf`` for all ``j >= i``."""
    return tuple(v if j < i - 1 else INF for j, v in enumerate(w))


def canonicalize(g: GroupoidElement) -> GroupoidElement:
    """Canonical representative of the class of ``g``: every entry from the first ``inf`` on is ``inf``."""
    if not in_ftilde(g):
        raise NotInSubgroupoid(f"{g} is not in F~_{g.n}")
    i = first_inf(g.w)
    if i is None:
        return g
    return GroupoidElement(g.z, g.x, saturate(g.w, i))


def canonical_unit(w: Sequence[ExtNat]) -> tuple:
    i = first_inf(w)
    return tuple(w) if i is None else saturate(w, i)


def sim_equivalent(g: GroupoidElement, h: GroupoidElement) -> bool:
    return canonicalize(g) == canonicalize(h)


@dataclass(frozen=True)
class CanonicalClass:
    """A class of F_n = F~_n / ~, held by its saturated representative."""

    rep: GroupoidElement

    def __post_init__(self):
        if canonicalize(self.rep) != self.rep:
            raise GroupoidError(f"{self.rep} is not in canonical form")

    @classmethod
    def of(cls, g: GroupoidElement) -> "CanonicalClass":
        return cls(canonicalize(g))

    @property
    def source(self) -> tuple:
        return canonical_unit(self.rep.source)

    @property
    def range(self) -> tuple:
        return canonical_unit(self.rep.range)

    def inverse(self) -> "CanonicalClass":
        return CanonicalClass.of(inverse(self.rep))

    def __str__(self) -> str:
        return f"[{self.rep}]"


def compose_classes(a, b) -> CanonicalClass:
    """Product of two classes of the quotient groupoid.

    ``a`` and ``b`` may be classes or arbitrary representatives in F~_n.  The
    left factor is moved onto the range of the right factor's representative,
    then the two are composed in F^n and the result saturated.
    """
    ra = a.rep if isinstance(a, CanonicalClass) else a
    rb = b.rep if isinstance(b, CanonicalClass) else b
    if not (in_ftilde(ra) and in_ftilde(rb)):
        raise NotInSubgroupoid("compose_classes needs elements of F~_n")
    if canonical_unit(ra.source) != canonical_unit(rb.range):
        raise NotComposable(f"unit classes of {ra} and {rb} differ")
    moved = make_element(ra.z, ra.x, rb.range)
    if not in_ftilde(moved):
        # cannot happen for elements of F~_n; kept as a loud failure
        raise NotInSubgroupoid(f"{moved} left F~_{ra.n} after moving units")
    return CanonicalClass.of(compose(moved, rb))


def pi_n_boundary(g: GroupoidElement) -> GroupoidElement:
    """Quotient map of F^n|_{boundary} onto F^n|_{F_n}: set ``w_n = inf``."""
    if not in_boundary(g.w):
        raise DomainError(f"{g} does not lie over the boundary")
    return GroupoidElement(g.z, g.x, g.w[:-1] + (INF,))


def pi_ni(g: GroupoidElement, i: int) -> GroupoidElement:
    """Quotient map of F^n|_{F_i} onto F^n|_{F_i cap F_n}."""
    _check_slot(i, g.n)
    if g.w[i - 1] != INF:
        raise DomainError(f"{g} does not lie over face {i}")
    return GroupoidElement(g.z, g.x, g.w[:-1] + (INF,))


def phi_star(g: GroupoidElement) -> GroupoidElement:
    if g.w[-1] != INF:
        raise DomainError(f"{g} does not lie over face F_n")
    adj = -g.z - sum(g.x[:-1])
    return GroupoidElement(g.z, g.x[:-1] + (g.x[-1] + adj,), g.w)


def phi_star_inv(g: GroupoidElement) -> GroupoidElement:
    if g.w[-1] != INF:
        raise DomainError(f"{g} does not lie over face F_n")
    adj = -g.z - sum(g.x[:-1])
    return GroupoidElement(g.z, g.x[:-1] + (g.x[-1] - adj,), g.w)


def in_ftilde_prime(g: GroupoidElement) -> bool:
    """Membership in the image of F~_{n-1} under phi_*, inside F^n|_{F_n}."""
    return g.w[-1] == INF and in_ftilde(g)


def in_ftilde_doubleprime(g: GroupoidElement) -> bool:
    return in_boundary(g.w) and in_ftilde(g)


def embed_lower(g: GroupoidElement) -> GroupoidElement:
    """Regard an element of F^{n-1} as an element of F^n|_{F_n}: append ``x_n = 0, w_n = inf``."""
    return GroupoidElement(g.z, g.x + (0,), g.w + (INF,))


def _window_units(n: int, N: int) -> list:
    values = list(range(N + 1)) + [INF]
    return list(itertools.product(values, repeat=n))


def enumerate_window(n: int, z_max: int, x_max: int, N: int) -> Iterator[GroupoidElement]:
    """All valid elements with ``|z| <= z_max``, ``|x_i| <= x_max``, ``w_i in {0..N, inf}``.

    Ordered lexicographically on ``(z, x, w)`` with ``inf`` last.
    """
    if n < 1 or min(z_max, x_max, N) < 0:
        raise ValueError("window bounds must be nonnegative and n >= 1")
    units = _window_units(n, N)
    shifts = list(itertools.product(range(-x_max, x_max + 1), repeat=n))
    for z in range(-z_max, z_max + 1):
        for x in shifts:
            for w in units:
                if all(wi == INF or wi + xi >= 0 for wi, xi in zip(w, x)):
                    yield GroupoidElement(z, x, w)
