"""Secrecy rate regions of the two-user (and K-user) MAC wiretap channel.

Every builder takes an :class:`~macwt.channel.MIBundle`, converts it to exact
rationals and returns a closed :class:`~macwt.polytope.Polytope`.  Right-hand
sides written ``[.]^+`` are clipped at zero before the row is formed.
"""

from __future__ import annotations

from enum import Enum
from fractions import Fraction
from typing import Sequence

from .channel import DMWiretapChannel, MIBundle, as_rational, mi_bundle, subsets
from .polytope import Polytope, convex_hull_union, fm_eliminate

MAX_K = 4


class RegionError(ValueError):
    pass


class RegionKind(str, Enum):
    THEOREM_ONE = "theorem1"
    LEMMA_ONE_K = "lemma1"
    TEKIN_YENER_R1 = "tekin_r1"
    DERIVED_R2 = "r2"
    LIFTED_WITH_GUARD_RATES = "lifted"
    EPSILON_STRICT = "eps_strict"


def secret_axis(k: int) -> str:
    return f"R{k}s"


def open_axis(k: int) -> str:
    return f"R{k}o"


def rate_axes(num_users: int) -> tuple[str, ...]:
    return tuple(a for k in range(1, num_users + 1) for a in (secret_axis(k), open_axis(k)))


GUARD_AXES = ("R1g", "R2g")
SPLIT_AXES = ("R1x", "R2x")
LIFTED_AXES = rate_axes(2) + GUARD_AXES


def _plus(x: Fraction) -> Fraction:
    return x if x > 0 else Fraction(0)


def _exact(mi: MIBundle) -> MIBundle:
    return mi.rational()


def _need_two_users(mi: MIBundle):
    if mi.num_users != 2:
        raise RegionError(f"region defined for two users, bundle has {mi.num_users}")


def _row(coeffs: dict, rhs):
    return coeffs, rhs


def _sum(labels) -> dict:
    out: dict[str, Fraction] = {}
    for lab in labels:
        out[lab] = out.get(lab, Fraction(0)) + 1
    return out


def _to_polytope(axes, rows) -> Polytope:
    return Polytope(axes, [(tuple(as_rational(c.get(a, 0)) for a in axes), rhs) for c, rhs in rows])


def _theorem1_rows(mi: MIBundle, eps: Fraction):
    users = mi.users
    rows = []
    for s in subsets(users, nonempty=True):
        cap = mi.main(s)
        rows.append(_row(_sum([secret_axis(k) for k in s] + [open_axis(k) for k in s]), _plus(cap - eps)))
        rows.append(_row(_sum(secret_axis(k) for k in s), _plus(cap - mi.eve(s) - eps)))
    for k in sorted(users):
        other = users - {k}
        labels = [secret_axis(u) for u in sorted(users)] + [open_axis(k)]
        rows.append(_row(_sum(labels), _plus(mi.main(users) - mi.eve(other) - eps)))
    return rows


def region_theorem1(mi: MIBundle) -> Polytope:
    """Region with the three inequality families: sum caps, secrecy caps, cross caps."""
    _need_two_users(mi)
    return _to_polytope(rate_axes(2), _theorem1_rows(_exact(mi), Fraction(0)))


def epsilon_strict_region(mi: MIBundle, eps=0) -> Polytope:
    """Three-family region with every right-hand side lowered by ``eps``, then clipped."""
    _need_two_users(mi)
    eps = as_rational(eps)
    if eps < 0:
        raise RegionError("eps must be nonnegative")
    return _to_polytope(rate_axes(2), _theorem1_rows(_exact(mi), eps))


def region_lemma1(mi: MIBundle, num_users: int | None = None) -> Polytope:
    """K-user region: one row per pair ``S1 <= S``, ``S`` nonempty."""
    k = mi.num_users if num_users is None else num_users
    if not 1 <= k <= MAX_K:
        raise RegionError(f"K={k} outside 1..{MAX_K}")
    if k != mi.num_users:
        raise RegionError(f"bundle has {mi.num_users} users, asked for {k}")
    mi = _exact(mi)
    rows = []
    for s in subsets(mi.users, nonempty=True):
        for s1 in subsets(s):
            labels = [secret_axis(u) for u in s] + [open_axis(u) for u in s - s1]
            rows.append(_row(_sum(labels), _plus(mi.main(s) - mi.eve(s1))))
    return _to_polytope(rate_axes(k), rows)


def lemma1_row_count(num_users: int) -> int:
    """Number of ``(S, S1)`` pairs before deduplication, ``3^K - 1``."""
    return 3**num_users - 1


def region_tekin_r1(mi: MIBundle) -> Polytope:
    """Sum caps and secrecy caps only (no cross caps)."""
    _need_two_users(mi)
    mi = _exact(mi)
    rows = []
    for s in subsets(mi.users, nonempty=True):
        cap = mi.main(s)
        rows.append(_row(_sum([secret_axis(k) for k in s] + [open_axis(k) for k in s]), cap))
        rows.append(_row(_sum(secret_axis(k) for k in s), _plus(cap - mi.eve(s))))
    return _to_polytope(rate_axes(2), rows)


def region_r2(mi: MIBundle) -> Polytope:
    """Sum caps, secrecy caps and open-rate caps ``sum_S R_ko <= I(X_S; Z | X_S^c)``."""
    _need_two_users(mi)
    mi = _exact(mi)
    rows = []
    for s in subsets(mi.users, nonempty=True):
        cap = mi.main(s)
        rows.append(_row(_sum([secret_axis(k) for k in s] + [open_axis(k) for k in s]), cap))
        rows.append(_row(_sum(secret_axis(k) for k in s), _plus(cap - mi.eve(s))))
        rows.append(_row(_sum(open_axis(k) for k in s), mi.eve_given_rest(s)))
    return _to_polytope(rate_axes(2), rows)


def lifted_region(mi: MIBundle, eps=0) -> Polytope:
    """Guard-rate feasibility set over ``(R1s, R1o, R2s, R2o, R1g, R2g)``.

    ``sum_S (s + o + g) <= I(X_S; Y | X_S^c) - eps`` and
    ``sum_S (o + g) >= I(X_S; Z)`` for every nonempty ``S``; ``g >= 0``.
    """
    _need_two_users(mi)
    mi = _exact(mi)
    eps = as_rational(eps)
    rows = []
    for s in subsets(mi.users, nonempty=True):
        guards = [GUARD_AXES[k - 1] for k in s]
        rows.append(_row(_sum([secret_axis(k) for k in s] + [open_axis(k) for k in s] + guards), mi.main(s) - eps))
        neg = {lab: -c for lab, c in _sum([open_axis(k) for k in s] + guards).items()}
        rows.append(_row(neg, -mi.eve(s)))
    return _to_polytope(LIFTED_AXES, rows)


def project_lifted(mi: MIBundle, eps=0) -> Polytope:
    """Eliminate both guard rates from :func:`lifted_region`."""
    p = lifted_region(mi, eps)
    for axis in GUARD_AXES:
        p = fm_eliminate(p, axis)
    return p


def rate_split_system(mi: MIBundle) -> Polytope:
    """Split-rate system over ``(R1s, R1o, R2s, R2o, R1x, R2x)``.

    ``sum_S (s + o + x) <= I(X_S; Y | X_S^c)``,
    ``sum_S (o + x) <= I(X_S; Z | X_S^c)`` with equality for the full set,
    ``sum_S s <= [I(X_S; Y | X_S^c) - I(X_S; Z)]^+`` and ``x >= 0``.
    """
    _need_two_users(mi)
    mi = _exact(mi)
    rows = []
    for s in subsets(mi.users, nonempty=True):
        cap = mi.main(s)
        xs = [SPLIT_AXES[k - 1] for k in s]
        rows.append(_row(_sum([secret_axis(k) for k in s] + [open_axis(k) for k in s] + xs), cap))
        open_plus_x = _sum([open_axis(k) for k in s] + xs)
        rows.append(_row(open_plus_x, mi.eve_given_rest(s)))
        if s == mi.users:
            rows.append(_row({lab: -c for lab, c in open_plus_x.items()}, -mi.eve_given_rest(s)))
        rows.append(_row(_sum(secret_axis(k) for k in s), _plus(cap - mi.eve(s))))
    return _to_polytope(rate_axes(2) + SPLIT_AXES, rows)


def project_rate_split(mi: MIBundle) -> Polytope:
    p = rate_split_system(mi)
    for axis in SPLIT_AXES:
        p = fm_eliminate(p, axis)
    return p


def build_region(kind: RegionKind | str, mi: MIBundle, eps=0, num_users: int | None = None) -> Polytope:
    kind = RegionKind(kind)
    if kind is RegionKind.THEOREM_ONE:
        return region_theorem1(mi)
    if kind is RegionKind.LEMMA_ONE_K:
        return region_lemma1(mi, num_users)
    if kind is RegionKind.TEKIN_YENER_R1:
        return region_tekin_r1(mi)
    if kind is RegionKind.DERIVED_R2:
        return region_r2(mi)
    if kind is RegionKind.LIFTED_WITH_GUARD_RATES:
        return lifted_region(mi, eps)
    return epsilon_strict_region(mi, eps)


def hull_over_inputs(
    ch: DMWiretapChannel,
    family: Sequence[Sequence],
    kind: RegionKind | str = RegionKind.THEOREM_ONE,
    eps=0,
    max_dim: int | None = None,
) -> Polytope:
    """Convex hull of the union of per-input-distribution regions."""
    if not family:
        raise RegionError("input-distribution family is empty")
    regions = [build_region(kind, mi_bundle(ch, px), eps, ch.num_users) for px in family]
    if len(regions) == 1:
        return regions[0]
    return convex_hull_union(regions, max_dim)
