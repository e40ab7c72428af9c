"""Discrete memoryless multiple-access wiretap channels and their information quantities.

A channel is the table ``p(y, z | x_1, ..., x_K)`` stored as an array of shape
``(|X_1|, ..., |X_K|, |Y|, |Z|)``.  Input distributions are independent
per-user pmfs.  Every quantity is in bits.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

ROW_TOL = 1e-12
MI_CLAMP_TOL = 1e-9
MAX_USERS = 4
RATIONAL_DENOMINATOR = 10**12


class ChannelError(ValueError):
    """Malformed channel, input distribution or variable selection."""


@dataclass(frozen=True)
class DMWiretapChannel:
    """Transition law ``p(y, z | x)`` of a K-user MAC with an eavesdropper.

    ``transition[x_1, ..., x_K, y, z]`` holds the probability.  The array is
    copied and made read-only on construction.
    """

    transition: np.ndarray

    def __post_init__(self):
        arr = np.array(self.transition, dtype=float)
        if arr.ndim < 3:
            raise ChannelError("transition needs at least one input axis plus y and z axes")
        arr.setflags(write=False)
        object.__setattr__(self, "transition", arr)

    @property
    def num_users(self) -> int:
        return self.transition.ndim - 2

    @property
    def input_sizes(self) -> tuple[int, ...]:
        return tuple(self.transition.shape[:-2])

    @property
    def y_size(self) -> int:
        return self.transition.shape[-2]

    @property
    def z_size(self) -> int:
        return self.transition.shape[-1]

    def main_channel(self) -> np.ndarray:
        """``p(y | x)`` marginal, shape ``(*input_sizes, |Y|)``."""
        return self.transition.sum(axis=-1)

    def eve_channel(self) -> np.ndarray:
        """``p(z | x)`` marginal, shape ``(*input_sizes, |Z|)``."""
        return self.transition.sum(axis=-2)

    def relabel_users(self, order: Sequence[int]) -> "DMWiretapChannel":
        """Channel with user axes permuted; ``order[i]`` is the old index of new user i."""
        k = self.num_users
        return DMWiretapChannel(np.transpose(self.transition, tuple(order) + (k, k + 1)))


@dataclass(frozen=True)
class Violation:
    kind: str  # "row-sum" or "negative"
    index: tuple[int, ...]
    value: float


def validate_channel(ch: DMWiretapChannel, tol: float = ROW_TOL) -> list[Violation]:
    """Report every row-sum and negativity violation; an empty list means valid."""
    report = []
    t = ch.transition
    for idx in zip(*np.nonzero(t < 0)):
        report.append(Violation("negative", tuple(int(i) for i in idx), float(t[idx])))
    for idx in zip(*np.nonzero(t > 1)):
        report.append(Violation("above-one", tuple(int(i) for i in idx), float(t[idx])))
    sums = t.sum(axis=(-2, -1))
    for idx in itertools.product(*(range(s) for s in ch.input_sizes)):
        if abs(sums[idx] - 1.0) > tol:
            report.append(Violation("row-sum", tuple(idx), float(sums[idx])))
    return report


def check_inputs(ch: DMWiretapChannel, px: Sequence[Iterable[float]], tol: float = ROW_TOL) -> list[np.ndarray]:
    """Validate per-user pmfs against the channel and return them as arrays."""
    if len(px) != ch.num_users:
        raise ChannelError(f"expected {ch.num_users} input pmfs, got {len(px)}")
    out = []
    for k, (p, size) in enumerate(zip(px, ch.input_sizes)):
        p = np.asarray(p, dtype=float)
        if p.shape != (size,):
            raise ChannelError(f"user {k + 1}: pmf has shape {p.shape}, alphabet size is {size}")
        if np.any(p < 0) or abs(p.sum() - 1.0) > tol:
            raise ChannelError(f"user {k + 1}: not a pmf")
        out.append(p)
    return out


def uniform_inputs(sizes: Sequence[int]) -> list[np.ndarray]:
    return [np.full(s, 1.0 / s) for s in sizes]


def random_channel(input_sizes: Sequence[int], y_size: int, z_size: int, rng: np.random.Generator) -> DMWiretapChannel:
    """Each row ``p(., . | x)`` drawn from a symmetric Dirichlet(1)."""
    rows = rng.dirichlet(np.ones(y_size * z_size), size=int(np.prod(input_sizes)))
    return DMWiretapChannel(rows.reshape(*input_sizes, y_size, z_size))


def deterministic_channel(input_sizes: Sequence[int], y_size: int, z_size: int, f_y, f_z) -> DMWiretapChannel:
    """Channel with ``y = f_y(*x)`` and ``z = f_z(*x)``."""
    t = np.zeros((*input_sizes, y_size, z_size))
    for x in itertools.product(*(range(s) for s in input_sizes)):
        t[x + (f_y(*x), f_z(*x))] = 1.0
    return DMWiretapChannel(t)


def joint_distribution(ch: DMWiretapChannel, px: Sequence[Iterable[float]]) -> np.ndarray:
    """``p(x_1, ..., x_K, y, z) = prod_k p(x_k) p(y, z | x)``."""
    pmfs = check_inputs(ch, px)
    weight = pmfs[0]
    for p in pmfs[1:]:
        weight = np.multiply.outer(weight, p)
    return ch.transition * weight[..., None, None]


def _xlogx_sum(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def entropy(joint: np.ndarray, variables: Iterable[int]) -> float:
    """Joint entropy of the selected axes of ``joint`` (0 log 0 = 0)."""
    keep = sorted(set(variables))
    if not keep:
        return 0.0
    drop = tuple(i for i in range(joint.ndim) if i not in keep)
    return _xlogx_sum(joint.sum(axis=drop) if drop else joint)


def _clamp(v):
    if v < 0 and v > -MI_CLAMP_TOL:
        return type(v)(0)
    return v


def mutual_information(joint: np.ndarray, a: Iterable[int], b: Iterable[int], c: Iterable[int] = ()) -> float:
    """``I(A; B | C)`` over axes of ``joint`` via ``H(A,C) + H(B,C) - H(A,B,C) - H(C)``."""
    a, b, c = set(a), set(b), set(c)
    if a & b or a & c or b & c:
        raise ChannelError("variable sets must be disjoint")
    if not a or not b:
        return 0.0
    v = entropy(joint, a | c) + entropy(joint, b | c) - entropy(joint, a | b | c) - entropy(joint, c)
    return _clamp(v)


def subsets(users: Iterable[int], nonempty: bool = False) -> list[frozenset]:
    users = sorted(users)
    out = [frozenset(s) for r in range(len(users) + 1) for s in itertools.combinations(users, r)]
    return out[1:] if nonempty else out


def as_rational(x, denominator: int = RATIONAL_DENOMINATOR) -> Fraction:
    """Exact rational for ``x``; floats are rounded onto the ``1/denominator`` grid."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    return Fraction(round(float(x) * denominator), denominator)


@dataclass(frozen=True)
class MIBundle:
    """Conditional entropies from which every region inequality is derived.

    ``y_given[T] = H(Y | X_T)`` and ``z_given[T] = H(Z | X_T)`` for every user
    subset ``T`` (users numbered from 1).  Mutual informations are differences
    of these, so chain rules hold exactly, also in the rational form.
    """

    num_users: int
    y_given: Mapping[frozenset, float]
    z_given: Mapping[frozenset, float]
    h_inputs: Mapping[frozenset, float] = field(default_factory=dict)

    @property
    def users(self) -> frozenset:
        return frozenset(range(1, self.num_users + 1))

    @property
    def exact(self) -> bool:
        return all(isinstance(v, Fraction) for v in self.y_given.values())

    @property
    def h_y(self):
        return self.y_given[frozenset()]

    @property
    def h_z(self):
        return self.z_given[frozenset()]

    def _complement(self, s) -> frozenset:
        return self.users - frozenset(s)

    def main(self, s) -> float:
        """``I(X_S; Y | X_{S^c})``."""
        s = frozenset(s)
        if not s:
            return self.h_y * 0
        return _clamp(self.y_given[self._complement(s)] - self.y_given[self.users])

    def eve(self, s) -> float:
        """``I(X_S; Z)``; zero for the empty set."""
        s = frozenset(s)
        if not s:
            return self.h_z * 0
        return _clamp(self.h_z - self.z_given[s])

    def eve_given_rest(self, s) -> float:
        """``I(X_S; Z | X_{S^c})``."""
        s = frozenset(s)
        if not s:
            return self.h_z * 0
        return _clamp(self.z_given[self._complement(s)] - self.z_given[self.users])

    def main_marginal(self, s) -> float:
        """``I(X_S; Y)`` without conditioning."""
        s = frozenset(s)
        if not s:
            return self.h_y * 0
        return _clamp(self.h_y - self.y_given[s])

    def rational(self, denominator: int = RATIONAL_DENOMINATOR) -> "MIBundle":
        if self.exact:
            return self
        conv = lambda d: {k: as_rational(v, denominator) for k, v in d.items()}
        return MIBundle(self.num_users, conv(self.y_given), conv(self.z_given), conv(self.h_inputs))

    def as_dict(self) -> dict:
        """Flat provenance record of the mutual informations, keyed by readable names."""
        out = {"H(Y)": float(self.h_y), "H(Z)": float(self.h_z)}
        for s in subsets(self.users, nonempty=True):
            name = ",".join(f"X{k}" for k in sorted(s))
            rest = ",".join(f"X{k}" for k in sorted(self._complement(s)))
            cond = f"|{rest}" if rest else ""
            out[f"I({name};Y{cond})"] = float(self.main(s))
            out[f"I({name};Z)"] = float(self.eve(s))
            out[f"I({name};Z{cond})"] = float(self.eve_given_rest(s))
            if s in self.h_inputs:
                out[f"H({name})"] = float(self.h_inputs[s])
        return out


def mi_bundle(ch: DMWiretapChannel, px: Sequence[Iterable[float]], max_users: int = MAX_USERS) -> MIBundle:
    if ch.num_users > max_users:
        raise ChannelError(f"{ch.num_users} users exceeds the configured maximum {max_users}")
    joint = joint_distribution(ch, px)
    k = ch.num_users
    y_ax, z_ax = k, k + 1
    y_given, z_given, h_inputs = {}, {}, {}
    for t in subsets(range(1, k + 1)):
        xs = {u - 1 for u in t}
        h_x = entropy(joint, xs)
        y_given[t] = entropy(joint, xs | {y_ax}) - h_x
        z_given[t] = entropy(joint, xs | {z_ax}) - h_x
        if t:
            h_inputs[t] = h_x
    return MIBundle(k, y_given, z_given, h_inputs)


# --- channel file format -----------------------------------------------------


def channel_to_json(ch: DMWiretapChannel, px: Sequence[Iterable[float]] | None = None) -> dict:
    doc = {
        "num_users": ch.num_users,
        "input_sizes": list(ch.input_sizes),
        "y_size": ch.y_size,
        "z_size": ch.z_size,
        "transition": ch.transition.tolist(),
    }
    if px is not None:
        doc["inputs"] = [np.asarray(p, dtype=float).tolist() for p in px]
    return doc


def channel_from_json(doc: Mapping) -> tuple[DMWiretapChannel, list[np.ndarray] | None]:
    try:
        k = int(doc["num_users"])
        sizes = tuple(int(s) for s in doc["input_sizes"])
        shape = (*sizes, int(doc["y_size"]), int(doc["z_size"]))
        table = np.asarray(doc["transition"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ChannelError(f"malformed channel document: {exc}") from exc
    if len(sizes) != k or table.shape != shape:
        raise ChannelError(f"transition shape {table.shape} does not match declared {shape}")
    ch = DMWiretapChannel(table)
    bad = validate_channel(ch)
    if bad:
        raise ChannelError(f"invalid channel: {bad[0]}")
    px = doc.get("inputs")
    return ch, (check_inputs(ch, px) if px is not None else None)


def load_channel(path) -> tuple[DMWiretapChannel, list[np.ndarray] | None]:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ChannelError(f"cannot read channel file {path}: {exc}") from exc
    return channel_from_json(doc)


def save_channel(path, ch: DMWiretapChannel, px=None) -> None:
    Path(path).write_text(json.dumps(channel_to_json(ch, px), indent=1, sort_keys=True) + "\n")
