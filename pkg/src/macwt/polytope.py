"""Exact rational polytopes over labelled rate axes.

Inequalities are stored as ``a . x <= b`` with :class:`fractions.Fraction`
entries.  Every axis carries an explicit nonnegativity row.  Vertex and facet
enumeration use the double description method on integer-scaled rows, so no
floating point enters inequality manipulation.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections.abc import Mapping
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .channel import as_rational

MAX_DIM = 6
FLOAT_TOL = 1e-9


class PolytopeError(ValueError):
    pass


class UnboundedPolytopeError(PolytopeError):
    pass


class DimensionLimitError(PolytopeError):
    """Dimension above the enumeration cap."""


# --- value types -------------------------------------------------------------


@dataclass(frozen=True)
class LinearInequality:
    """``sum_label coeffs[label] * x_label <= rhs``; zero coefficients are omitted."""

    coeffs: tuple[tuple[str, Fraction], ...]
    rhs: Fraction

    @classmethod
    def build(cls, coeffs: Mapping[str, object], rhs) -> "LinearInequality":
        items = tuple(sorted((k, as_rational(v)) for k, v in coeffs.items() if as_rational(v) != 0))
        return cls(items, as_rational(rhs))

    def coefficient(self, label: str) -> Fraction:
        return dict(self.coeffs).get(label, Fraction(0))

    @property
    def is_constant(self) -> bool:
        return not self.coeffs

    def __str__(self):
        terms = " + ".join(f"{c}*{k}" if c != 1 else k for k, c in self.coeffs) or "0"
        return f"{terms} <= {self.rhs}"


class RateTuple(Mapping):
    """Point with labelled coordinates; exact when every value is rational."""

    def __init__(self, values: Mapping[str, object] | None = None, **kw):
        data = dict(values or {}, **kw)
        self._labels = tuple(data)
        self._values = tuple(data.values())

    @classmethod
    def from_sequence(cls, axes: Sequence[str], values: Sequence) -> "RateTuple":
        if len(axes) != len(values):
            raise PolytopeError("axes and values differ in length")
        return cls(dict(zip(axes, values)))

    def __getitem__(self, key):
        try:
            return self._values[self._labels.index(key)]
        except ValueError:
            raise KeyError(key) from None

    def __iter__(self):
        return iter(self._labels)

    def __len__(self):
        return len(self._labels)

    @property
    def exact(self) -> bool:
        return all(isinstance(v, (Fraction, int)) for v in self._values)

    def aligned(self, axes: Sequence[str]) -> tuple:
        if set(axes) != set(self._labels):
            raise PolytopeError(f"point axes {sorted(self._labels)} do not match {sorted(axes)}")
        return tuple(self[a] for a in axes)

    def as_floats(self) -> dict[str, float]:
        return {k: float(v) for k, v in zip(self._labels, self._values)}

    def __eq__(self, other):
        if isinstance(other, Mapping):
            return dict(self) == dict(other)
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.items()))

    def __repr__(self):
        inner = ", ".join(f"{k}={v}" for k, v in zip(self._labels, self._values))
        return f"RateTuple({inner})"


# --- integer helpers ---------------------------------------------------------


def _primitive(vec: Sequence[int]) -> tuple[int, ...]:
    g = 0
    for v in vec:
        g = math.gcd(g, v)
    if g <= 1:
        return tuple(vec)
    return tuple(v // g for v in vec)


def _integer_row(row: Sequence[Fraction]) -> tuple[int, ...]:
    lcm = 1
    for v in row:
        lcm = lcm * v.denominator // math.gcd(lcm, v.denominator)
    return _primitive([int(v * lcm) for v in row])


def _dot(a, b):
    return sum(x * y for x, y in zip(a, b))


def _rank(rows: Sequence[Sequence]) -> int:
    return len(_independent_rows(rows))


def _independent_rows(rows: Sequence[Sequence]) -> list[int]:
    """Indices of a maximal linearly independent subset, chosen greedily in order."""
    basis: list[tuple[list[Fraction], int]] = []  # (reduced row, pivot col)
    chosen = []
    for idx, row in enumerate(rows):
        r = [Fraction(v) for v in row]
        for b, piv in basis:
            if r[piv] != 0:
                f = r[piv] / b[piv]
                r = [x - f * y for x, y in zip(r, b)]
        piv = next((j for j, v in enumerate(r) if v != 0), None)
        if piv is not None:
            basis.append((r, piv))
            chosen.append(idx)
    return chosen


def _solve(mat: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    n = len(mat)
    a = [list(map(Fraction, row)) + [Fraction(b)] for row, b in zip(mat, rhs)]
    for col in range(n):
        piv = next(r for r in range(col, n) if a[r][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        p = a[col][col]
        a[col] = [v / p for v in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [a[r][n] for r in range(n)]


def _null_space(rows: Sequence[Sequence], ncols: int) -> list[list[Fraction]]:
    """Exact basis of ``{y : row . y = 0 for all rows}``."""
    m = [[Fraction(v) for v in row] for row in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        p = m[r][c]
        m[r] = [v / p for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fcol in free:
        v = [Fraction(0)] * ncols
        v[fcol] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -m[i][fcol]
        basis.append(v)
    return basis


def extreme_rays(rows: Sequence[Sequence[int]], dim: int) -> list[tuple[int, ...]]:
    """Extreme rays of the pointed cone ``{y : row . y >= 0}`` by double description.

    ``rows`` must have rank ``dim``; rays are returned as primitive integer
    vectors.  Adjacency uses the combinatorial zero-set test.
    """
    rows = [tuple(int(v) for v in r) for r in rows]
    basis_idx = _independent_rows(rows)
    if len(basis_idx) < dim:
        raise UnboundedPolytopeError("cone has a lineality space")
    basis_idx = basis_idx[:dim]
    # Columns of B^{-1} generate the simplicial cone {B y >= 0}.
    b = [[Fraction(v) for v in rows[i]] for i in basis_idx]
    rays: list[tuple[tuple[int, ...], int]] = []
    for j in range(dim):
        e = [Fraction(int(i == j)) for i in range(dim)]
        col = _solve(b, e)
        zero = 0
        for pos, i in enumerate(basis_idx):
            if pos != j:
                zero |= 1 << i
        rays.append((_integer_row(col), zero))
    done = set(basis_idx)
    for i, a in enumerate(rows):
        if i in done:
            continue
        bit = 1 << i
        pos, neg, nxt = [], [], []
        for ray, zero in rays:
            s = _dot(a, ray)
            if s > 0:
                pos.append((ray, zero, s))
                nxt.append((ray, zero))
            elif s < 0:
                neg.append((ray, zero, s))
            else:
                nxt.append((ray, zero | bit))
        if neg:
            zeros = [z for _, z in rays]
            for rp, zp, sp in pos:
                for rn, zn, sn in neg:
                    common = zp & zn
                    if bin(common).count("1") < dim - 2:
                        continue
                    if any((z & common) == common and z != zp and z != zn for z in zeros):
                        continue
                    new = _primitive([sp * x - sn * y for x, y in zip(rn, rp)])
                    nxt.append((new, common | bit))
        rays = nxt
        done.add(i)
    return [r for r, _ in rays]


# --- polytope ----------------------------------------------------------------


class Polytope:
    """H-representation ``A x <= b`` over ``axes`` with nonnegativity on every axis."""

    def __init__(self, axes: Sequence[str], inequalities: Iterable[LinearInequality | tuple] = ()):
        self.axes = tuple(axes)
        if len(set(self.axes)) != len(self.axes):
            raise PolytopeError("duplicate axis labels")
        rows = []
        for ineq in inequalities:
            if isinstance(ineq, LinearInequality):
                unknown = {k for k, _ in ineq.coeffs} - set(self.axes)
                if unknown:
                    raise PolytopeError(f"inequality uses unknown axes {sorted(unknown)}")
                rows.append((tuple(ineq.coefficient(a) for a in self.axes), ineq.rhs))
            else:
                coef, rhs = ineq
                if len(coef) != len(self.axes):
                    raise PolytopeError("coefficient row does not match axes")
                rows.append((tuple(as_rational(c) for c in coef), as_rational(rhs)))
        for i in range(len(self.axes)):
            rows.append((tuple(Fraction(-1 if j == i else 0) for j in range(len(self.axes))), Fraction(0)))
        self._rows = _canonical_rows(rows)

    # representation -----------------------------------------------------

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def rows(self) -> tuple[tuple[tuple[Fraction, ...], Fraction], ...]:
        return self._rows

    @property
    def inequalities(self) -> list[LinearInequality]:
        return [LinearInequality.build(dict(zip(self.axes, c)), b) for c, b in self._rows]

    def is_nonnegativity(self, row) -> bool:
        coef, rhs = row
        return rhs == 0 and sum(1 for c in coef if c != 0) == 1 and min(coef) < 0

    def _with_rows(self, rows) -> "Polytope":
        p = Polytope.__new__(Polytope)
        p.axes = self.axes
        p._rows = _canonical_rows(list(rows))
        return p

    def __repr__(self):
        return f"Polytope(axes={self.axes}, {len(self._rows)} rows)"

    # point queries ------------------------------------------------------

    def slacks(self, point) -> list:
        x = _point_values(point, self.axes)
        return [b - _dot(c, x) for c, b in self._rows]

    def substitute(self, fixed: Mapping[str, object]) -> "Polytope":
        """Cross-section with the given axes pinned; those axes are removed."""
        keep = [a for a in self.axes if a not in fixed]
        idx = [self.axes.index(a) for a in keep]
        rows = []
        for coef, rhs in self._rows:
            shift = sum(coef[self.axes.index(a)] * as_rational(v) for a, v in fixed.items())
            rows.append((tuple(coef[i] for i in idx), rhs - shift))
        return Polytope(keep, rows)

    # serialization ------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "axes": list(self.axes),
            "inequalities": [
                {"coefficients": [_frac_str(c) for c in coef], "rhs": _frac_str(rhs)} for coef, rhs in self._rows
            ],
        }

    @classmethod
    def from_json(cls, doc: Mapping) -> "Polytope":
        try:
            rows = [
                (tuple(Fraction(c) for c in r["coefficients"]), Fraction(r["rhs"])) for r in doc["inequalities"]
            ]
            return cls(doc["axes"], rows)
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise PolytopeError(f"malformed polytope document: {exc}") from exc


def _frac_str(v: Fraction) -> str:
    return f"{v.numerator}/{v.denominator}"


def _canonical_rows(rows):
    """Scale rows to primitive integer normals, drop true constants and exact duplicates."""
    out = []
    seen = set()
    false_constant = False
    for coef, rhs in rows:
        coef = tuple(Fraction(c) for c in coef)
        rhs = Fraction(rhs)
        if all(c == 0 for c in coef):
            if rhs < 0:
                false_constant = True
            continue
        lcm = 1
        for c in coef:
            lcm = lcm * c.denominator // math.gcd(lcm, c.denominator)
        ints = [int(c * lcm) for c in coef]
        g = 0
        for v in ints:
            g = math.gcd(g, v)
        scale = Fraction(lcm, g)
        key = (tuple(Fraction(v, g) for v in ints), rhs * scale)
        if key not in seen:
            seen.add(key)
            out.append(key)
    if false_constant:
        out.append((tuple(Fraction(0) for _ in (rows[0][0] if rows else ())), Fraction(-1)))
    return tuple(out)


def _point_values(point, axes) -> tuple:
    if isinstance(point, Mapping):
        if not isinstance(point, RateTuple):
            point = RateTuple(point)
        return point.aligned(axes)
    vals = tuple(point)
    if len(vals) != len(axes):
        raise PolytopeError("point dimension does not match axes")
    return vals


# --- operations --------------------------------------------------------------


def _check_dim(p: Polytope, max_dim: int | None):
    limit = MAX_DIM if max_dim is None else max_dim
    if p.dim > limit:
        raise DimensionLimitError(f"dimension {p.dim} exceeds limit {limit}")


def _vertex_tuples(p: Polytope) -> list[tuple[Fraction, ...]]:
    # Homogenise: b x0 - a.x >= 0 for every row, plus x0 >= 0.
    cone_rows = [_integer_row((rhs,) + tuple(-c for c in coef)) for coef, rhs in p.rows]
    cone_rows.append((1,) + (0,) * p.dim)
    rays = extreme_rays(cone_rows, p.dim + 1)
    verts = [tuple(Fraction(v, r[0]) for v in r[1:]) for r in rays if r[0] > 0]
    if verts and any(r[0] == 0 for r in rays):
        raise UnboundedPolytopeError("polytope is unbounded")
    return sorted(set(verts))


def vertices(p: Polytope, max_dim: int | None = None) -> list[RateTuple]:
    """Exact vertex list, sorted and deduplicated; empty for an infeasible system."""
    _check_dim(p, max_dim)
    return [RateTuple.from_sequence(p.axes, v) for v in _vertex_tuples(p)]


def is_empty(p: Polytope, max_dim: int | None = None) -> bool:
    _check_dim(p, max_dim)
    return not _vertex_tuples(p)


def remove_redundant(p: Polytope, max_dim: int | None = None) -> Polytope:
    """Drop every row whose removal leaves the vertex set unchanged.

    Nonnegativity rows are always kept.  Rows are tested one at a time
    against the current system, so of two duplicates only one is dropped.
    """
    _check_dim(p, max_dim)
    ref = _vertex_tuples(p)
    rows = list(p.rows)
    i = 0
    while i < len(rows):
        row = rows[i]
        if p.is_nonnegativity(row):
            i += 1
            continue
        coef, rhs = row
        if ref and all(_dot(coef, v) < rhs for v in ref):
            del rows[i]  # never tight on a nonempty polytope
            continue
        trial = rows[:i] + rows[i + 1 :]
        try:
            same = _vertex_tuples(p._with_rows(trial)) == ref
        except UnboundedPolytopeError:
            same = False
        if same:
            del rows[i]
        else:
            i += 1
    return p._with_rows(rows)


def fm_eliminate(p: Polytope, axis: str, reduce: bool = True, max_dim: int | None = None) -> Polytope:
    """Fourier-Motzkin projection of ``p`` onto the remaining axes."""
    if axis not in p.axes:
        raise PolytopeError(f"unknown axis {axis!r}")
    if p.dim == 1:
        raise PolytopeError("cannot eliminate the only axis")
    j = p.axes.index(axis)
    keep = [i for i in range(p.dim) if i != j]
    pos, neg, rest = [], [], []
    for coef, rhs in p.rows:
        (pos if coef[j] > 0 else neg if coef[j] < 0 else rest).append((coef, rhs))
    new_rows = [(tuple(coef[i] for i in keep), rhs) for coef, rhs in rest]
    for cp, bp in pos:
        for cn, bn in neg:
            wp, wn = -cn[j], cp[j]
            new_rows.append((tuple(wp * cp[i] + wn * cn[i] for i in keep), wp * bp + wn * bn))
    out = Polytope([p.axes[i] for i in keep], new_rows)
    return remove_redundant(out, max_dim) if reduce else out


def contains_point(p: Polytope, point, tol: float = FLOAT_TOL) -> bool:
    """Membership; exact for rational points, within ``tol`` otherwise."""
    vals = _point_values(point, p.axes)
    if all(isinstance(v, (Fraction, int)) for v in vals):
        return all(s >= 0 for s in p.slacks(vals))
    fl = [float(v) for v in vals]
    return all(float(b) - sum(float(c) * x for c, x in zip(coef, fl)) >= -tol for coef, b in p.rows)


def _same_axes(p: Polytope, q: Polytope):
    if p.axes != q.axes:
        raise PolytopeError(f"axes differ: {p.axes} vs {q.axes}")


def is_subset(p: Polytope, q: Polytope, max_dim: int | None = None) -> bool:
    _same_axes(p, q)
    _check_dim(q, max_dim)
    return all(contains_point(q, v) for v in vertices(p, max_dim))


def equals(p: Polytope, q: Polytope, max_dim: int | None = None) -> bool:
    _same_axes(p, q)
    _check_dim(p, max_dim)
    return _vertex_tuples(p) == _vertex_tuples(q)


def hull_of_points(axes: Sequence[str], points: Iterable, max_dim: int | None = None) -> Polytope:
    """H-representation of the convex hull of finitely many points.

    Facets are the extreme rays of the dual cone ``{(c0, c) : c0 + c.v >= 0}``
    restricted to the orthogonal complement of its lineality space; that
    lineality space supplies the affine-hull equalities.
    """
    axes = tuple(axes)
    limit = MAX_DIM if max_dim is None else max_dim
    if len(axes) > limit:
        raise DimensionLimitError(f"dimension {len(axes)} exceeds limit {limit}")
    pts = sorted({tuple(as_rational(x) for x in _point_values(v, axes)) for v in points})
    d = len(axes)
    if not pts:
        return Polytope(axes, [((Fraction(0),) * d, Fraction(-1))])
    gen = [_integer_row((Fraction(1),) + v) for v in pts]
    lineality = [_integer_row(v) for v in _null_space(gen, d + 1)]
    cone = list(gen) + lineality + [tuple(-x for x in l) for l in lineality]
    rows = []
    for ray in extreme_rays(cone, d + 1):
        c0, c = ray[0], ray[1:]
        rows.append((tuple(Fraction(-x) for x in c), Fraction(c0)))
    for l in lineality:
        c0, c = l[0], l[1:]
        rows.append((tuple(Fraction(x) for x in c), Fraction(-c0)))
        rows.append((tuple(Fraction(-x) for x in c), Fraction(c0)))
    return remove_redundant(Polytope(axes, rows), max_dim)


def convex_hull_union(polytopes: Sequence[Polytope], max_dim: int | None = None) -> Polytope:
    if not polytopes:
        raise PolytopeError("need at least one polytope")
    axes = polytopes[0].axes
    for q in polytopes[1:]:
        _same_axes(polytopes[0], q)
    pooled = [v for q in polytopes for v in vertices(q, max_dim)]
    return hull_of_points(axes, pooled, max_dim)


def slice_polygon(p: Polytope, free: Sequence[str], fixed: Mapping[str, object]) -> list[RateTuple]:
    """Vertices of a 2-D cross-section in counter-clockwise order."""
    if len(free) != 2 or set(free) | set(fixed) != set(p.axes) or set(free) & set(fixed):
        raise PolytopeError("need exactly two free axes and fixed values for all others")
    sec = p.substitute(fixed)
    sec = Polytope(list(free), [(tuple(c[sec.axes.index(a)] for a in free), b) for c, b in sec.rows])
    verts = vertices(sec)
    if len(verts) < 3:
        return verts
    cx = sum(float(v[free[0]]) for v in verts) / len(verts)
    cy = sum(float(v[free[1]]) for v in verts) / len(verts)
    return sorted(verts, key=lambda v: math.atan2(float(v[free[1]]) - cy, float(v[free[0]]) - cx))


# --- export ------------------------------------------------------------------


def fmt(x) -> str:
    return f"{float(x):.12g}"


def vertices_csv(axes: Sequence[str], points: Iterable[Mapping]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(axes))
    for v in points:
        w.writerow([fmt(v[a]) for a in axes])
    return buf.getvalue()


def dumps(doc) -> str:
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"
