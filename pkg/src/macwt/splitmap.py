"""Rate splitting between the three-family region and the open-rate-capped region.

Tuples of the three-family region are sorted into six categories by their
open rates; each category has a substitution that reclassifies open rate as
secret rate and lands in the open-rate-capped region.  The module also builds
the tuple that lies in the two-family region but outside the three-family
one, and searches random channels for it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .channel import DMWiretapChannel, MIBundle, deterministic_channel, mi_bundle, random_channel, uniform_inputs
from .polytope import RateTuple, contains_point
from .regions import rate_axes, region_tekin_r1, region_theorem1

GAP_TOL = 1e-9
_ONE, _TWO, _BOTH = frozenset({1}), frozenset({2}), frozenset({1, 2})


class SplitError(ValueError):
    pass


@dataclass
class TransformReport:
    input: RateTuple
    category: int
    output: RateTuple
    verified: bool
    checks: list[tuple[str, object]] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "input": {k: float(v) for k, v in self.input.items()},
            "category": self.category,
            "output": {k: float(v) for k, v in self.output.items()},
            "verified": self.verified,
            "checks": [{"name": n, "slack": float(s)} for n, s in self.checks],
        }


def _plus(x):
    return x if x > 0 else x * 0


def _as_tuple(t) -> RateTuple:
    if isinstance(t, RateTuple):
        return t
    if isinstance(t, dict):
        return RateTuple(t)
    return RateTuple.from_sequence(rate_axes(2), list(t))


def _values(t, exact: bool):
    vals = _as_tuple(t).aligned(rate_axes(2))
    if exact:
        return [Fraction(v) for v in vals]
    return [float(v) for v in vals]


def _bundle_for(t) -> bool:
    return _as_tuple(t).exact


def _require_in_region(t, mi: MIBundle):
    if not contains_point(region_theorem1(mi), _as_tuple(t)):
        raise SplitError(f"{t} is not in the three-family region")


def _open_caps(mi: MIBundle):
    """(I(X1;Z), I(X2;Z), I(X1;Z|X2), I(X2;Z|X1), I(X1,X2;Z))."""
    return mi.eve(_ONE), mi.eve(_TWO), mi.eve_given_rest(_ONE), mi.eve_given_rest(_TWO), mi.eve(_BOTH)


def _category(r1o, r2o, mi: MIBundle) -> int:
    b1, b2, a1, a2, c = _open_caps(mi)
    # Predicates tested in index order, so boundary ties go to the lower category.
    if r1o <= a1 and r2o <= a2 and r1o + r2o <= c:
        return 1
    if r1o > a1 and r2o <= b2:
        return 2
    if b2 < r2o <= a2 and r1o + r2o > c:
        return 3
    if r1o <= b1 and r2o > a2:
        return 4
    if b1 < r1o <= a1 and r2o > a2:
        return 5
    if r1o > a1 and r2o > a2:
        return 6
    raise SplitError(f"open rates ({r1o}, {r2o}) fall in no category")


def classify(t, mi: MIBundle) -> int:
    """Category 1..6 of a tuple of the three-family region by its open rates."""
    exact = _bundle_for(t)
    mi = mi.rational() if exact else mi
    _require_in_region(t, mi)
    _, r1o, _, r2o = _values(t, exact)
    return _category(r1o, r2o, mi)


def r2_checks(t: Sequence, mi: MIBundle) -> list[tuple[str, object]]:
    """Named slacks of every open-rate-capped-region inequality at ``t = (R1s, R1o, R2s, R2o)``."""
    r1s, r1o, r2s, r2o = t
    m1, m2, m12 = mi.main(_ONE), mi.main(_TWO), mi.main(_BOTH)
    b1, b2, a1, a2, c = _open_caps(mi)
    return [
        ("R1s >= 0", r1s),
        ("R1o >= 0", r1o),
        ("R2s >= 0", r2s),
        ("R2o >= 0", r2o),
        ("R1s+R1o <= I(X1;Y|X2)", m1 - r1s - r1o),
        ("R2s+R2o <= I(X2;Y|X1)", m2 - r2s - r2o),
        ("R1s+R1o+R2s+R2o <= I(X1,X2;Y)", m12 - r1s - r1o - r2s - r2o),
        ("R1s <= [I(X1;Y|X2)-I(X1;Z)]+", _plus(m1 - b1) - r1s),
        ("R2s <= [I(X2;Y|X1)-I(X2;Z)]+", _plus(m2 - b2) - r2s),
        ("R1s+R2s <= [I(X1,X2;Y)-I(X1,X2;Z)]+", _plus(m12 - c) - r1s - r2s),
        ("R1o <= I(X1;Z|X2)", a1 - r1o),
        ("R2o <= I(X2;Z|X1)", a2 - r2o),
        ("R1o+R2o <= I(X1,X2;Z)", c - r1o - r2o),
    ]


def transform(t, mi: MIBundle) -> TransformReport:
    """Move a three-family-region tuple into the open-rate-capped region by rate splitting."""
    exact = _bundle_for(t)
    mi = mi.rational() if exact else mi
    _require_in_region(t, mi)
    r1s, r1o, r2s, r2o = _values(t, exact)
    b1, b2, a1, a2, c = _open_caps(mi)
    cat = _category(r1o, r2o, mi)
    n1s, n1o, n2s, n2o = r1s, r1o, r2s, r2o
    if cat == 2:
        n1o = a1
    elif cat == 3:
        n1o = c - r2o
    elif cat == 4:
        n2o = a2
    elif cat == 5:
        n2o = c - r1o
    elif cat == 6:
        n1o, n2o = a1, b2
    n1s = r1s + r1o - n1o
    n2s = r2s + r2o - n2o
    out = (n1s, n1o, n2s, n2o)
    checks = r2_checks(out, mi)
    checks.append(("user 1 total conserved", (n1s + n1o) - (r1s + r1o)))
    checks.append(("user 2 total conserved", (n2s + n2o) - (r2s + r2o)))
    tol = 0 if exact else GAP_TOL
    ok = all(s >= -tol for name, s in checks if "conserved" not in name)
    ok = ok and all(abs(s) <= tol for name, s in checks if "conserved" in name)
    axes = rate_axes(2)
    return TransformReport(RateTuple.from_sequence(axes, (r1s, r1o, r2s, r2o)), cat, RateTuple.from_sequence(axes, out), ok, checks)


def counterexample_tuple(mi: MIBundle) -> RateTuple:
    """``([I(X1;Y|X2)-I(X1;Z)]+, 0, [I(X2;Y)-I(X2;Z|X1)]+, I(X1,X2;Z))``."""
    zero = mi.h_y * 0
    values = (
        _plus(mi.main(_ONE) - mi.eve(_ONE)),
        zero,
        _plus(mi.main_marginal(_TWO) - mi.eve_given_rest(_TWO)),
        mi.eve(_BOTH),
    )
    return RateTuple.from_sequence(rate_axes(2), values)


def check_gap_condition(mi: MIBundle, tol: float = GAP_TOL) -> bool:
    """``I(X2;Y) + I(X1;Z) <= I(X2;Y|X1)`` and ``I(X1,X2;Z) > I(X2;Z|X1)``."""
    first = float(mi.main_marginal(_TWO) + mi.eve(_ONE) - mi.main(_TWO)) <= tol
    second = float(mi.eve(_BOTH) - mi.eve_given_rest(_TWO)) > tol
    return first and second


def refutes_two_family_region(mi: MIBundle) -> bool:
    """True when the counterexample tuple is in the two-family region but not the three-family one."""
    mi = mi.rational()
    c = counterexample_tuple(mi)
    return contains_point(region_tekin_r1(mi), c) and not contains_point(region_theorem1(mi), c)


def xor_witness() -> tuple[DMWiretapChannel, list[np.ndarray]]:
    """``Y = X1 xor X2``, ``Z = X1``, uniform binary inputs."""
    ch = deterministic_channel([2, 2], 2, 2, lambda a, b: a ^ b, lambda a, b: a)
    return ch, uniform_inputs([2, 2])


@dataclass
class Witness:
    channel: DMWiretapChannel
    inputs: list[np.ndarray]
    trial: int
    tuple: RateTuple
    mi: MIBundle


def _trial_candidate(i: int, seed: int, input_sizes, y_size, z_size):
    rng = np.random.default_rng([seed, i])
    ch = random_channel(input_sizes, y_size, z_size, rng)
    if i % 2 == 0:
        px = uniform_inputs(input_sizes)
    else:
        px = [rng.dirichlet(np.ones(s)) for s in input_sizes]
    return ch, px


def search_counterexample(
    input_sizes: Sequence[int],
    y_size: int,
    z_size: int,
    trials: int,
    seed: int = 0,
    planted: Sequence[tuple[DMWiretapChannel, list]] = (),
) -> Witness | None:
    """First trial whose channel satisfies the gap condition and whose
    counterexample tuple is verified to separate the two regions.

    Trials ``0 .. len(planted)-1`` test the planted candidates; later trial
    ``i`` draws a Dirichlet(1) channel from the stream ``(seed, i)``, with
    uniform inputs on even ``i`` and Dirichlet(1) inputs on odd ``i``.
    """
    if trials < 1:
        raise SplitError("trials must be at least 1")
    for i in range(trials):
        if i < len(planted):
            ch, px = planted[i]
        else:
            ch, px = _trial_candidate(i, seed, input_sizes, y_size, z_size)
        w = _check_candidate(ch, px, i)
        if w is not None:
            return w
    return None


def _check_candidate(ch, px, trial) -> Witness | None:
    mi = mi_bundle(ch, px)
    if not check_gap_condition(mi):
        return None
    exact = mi.rational()
    if not refutes_two_family_region(exact):
        return None
    return Witness(ch, list(px), trial, counterexample_tuple(exact), mi)
