"""Desk-scale random coding for the two-user MAC wiretap channel.

Each user k has a codebook of ``M_k * W_k * G_k`` codewords, indexed so that
``l = (m * W_k + w) * G_k + g`` (0-based).  Secret message ``m`` owns the
contiguous block of ``W_k * G_k`` indices; open message ``w`` selects a bin of
``G_k`` codewords inside it and the encoder picks one uniformly.  Decoding is
joint-typicality search over every codeword pair.  Leakage is computed
exactly by enumerating every eavesdropper sequence.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .channel import DMWiretapChannel, MIBundle, check_inputs, joint_distribution, mi_bundle

MAX_BLOCKLENGTH = 10
MAX_ALPHABET = 4
MAX_CODEBOOK_PAIRS = 2**18
MAX_LEAKAGE_ATOMS = 10**7
MAX_LEAKAGE_WORK = 10**8
_FLOOR_SLACK = 1e-9


class SimulationError(ValueError):
    pass


class CapExceeded(SimulationError):
    """Requested computation exceeds a configured desk-scale cap."""


@dataclass(frozen=True)
class UserRates:
    secret: float = 0.0
    open: float = 0.0
    guard: float = 0.0


@dataclass(frozen=True)
class CodeConfig:
    n: int
    rates: tuple[UserRates, UserRates]
    eps: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise SimulationError(f"blocklength {self.n} must be positive")
        if self.n > MAX_BLOCKLENGTH:
            raise CapExceeded(f"blocklength {self.n} above cap {MAX_BLOCKLENGTH}")
        if len(self.rates) != 2:
            raise SimulationError("the simulator is two-user")
        object.__setattr__(self, "rates", tuple(r if isinstance(r, UserRates) else UserRates(*r) for r in self.rates))
        if any(v < 0 for r in self.rates for v in (r.secret, r.open, r.guard)):
            raise SimulationError("rates must be nonnegative")
        if self.eps <= 0:
            raise SimulationError("typicality eps must be positive")

    def _count(self, rate: float) -> int:
        return max(1, int(math.floor(2.0 ** (self.n * rate) + _FLOOR_SLACK)))

    def sizes(self, k: int) -> tuple[int, int, int]:
        """(secret messages, open messages, codewords per bin) of user ``k`` (0-based), floored."""
        r = self.rates[k]
        return self._count(r.secret), self._count(r.open), self._count(r.guard)

    def effective_rates(self) -> tuple[UserRates, UserRates]:
        """Rates actually realised after flooring the message counts."""
        out = []
        for k in range(2):
            m, w, g = self.sizes(k)
            out.append(UserRates(math.log2(m) / self.n, math.log2(w) / self.n, math.log2(g) / self.n))
        return tuple(out)

    def rate_adjustment(self) -> list[dict]:
        eff = self.effective_rates()
        return [
            {f"{name}_requested": getattr(self.rates[k], name) for name in ("secret", "open", "guard")}
            | {f"{name}_effective": getattr(eff[k], name) for name in ("secret", "open", "guard")}
            for k in range(2)
        ]


@dataclass(frozen=True, eq=False)
class Codebook:
    channel: DMWiretapChannel
    inputs: tuple[np.ndarray, ...]
    config: CodeConfig
    codewords: tuple[np.ndarray, np.ndarray]

    @property
    def n(self) -> int:
        return self.config.n

    def sizes(self, k: int) -> tuple[int, int, int]:
        return self.config.sizes(k)

    def subcodebook(self, k: int, m: int) -> range:
        """Index range owned by secret message ``m`` of user ``k``."""
        mm, w, g = self.sizes(k)
        if not 0 <= m < mm:
            raise SimulationError(f"user {k + 1}: secret message {m} out of range")
        return range(m * w * g, (m + 1) * w * g)

    def bin(self, k: int, m: int, w: int) -> range:
        """Indices of the codewords carrying ``(m, w)``."""
        mm, ww, g = self.sizes(k)
        if not (0 <= m < mm and 0 <= w < ww):
            raise SimulationError(f"user {k + 1}: message pair ({m}, {w}) out of range")
        start = (m * ww + w) * g
        return range(start, start + g)

    def messages_of(self, k: int, l: int) -> tuple[int, int]:
        _, w, g = self.sizes(k)
        return l // (w * g), (l // g) % w


def generate_codebooks(ch: DMWiretapChannel, px, cfg: CodeConfig, max_pairs: int = MAX_CODEBOOK_PAIRS) -> Codebook:
    """Draw every codeword symbol i.i.d. from its user's input pmf.

    User ``k`` uses the stream ``(seed, 0, k)``.
    """
    if ch.num_users != 2:
        raise SimulationError("the simulator is two-user")
    if max(ch.input_sizes + (ch.y_size, ch.z_size)) > MAX_ALPHABET:
        raise CapExceeded(f"alphabet sizes above {MAX_ALPHABET}")
    pmfs = check_inputs(ch, px)
    totals = [int(np.prod(cfg.sizes(k))) for k in range(2)]
    if totals[0] * totals[1] > max_pairs:
        raise CapExceeded(f"codebook has {totals[0] * totals[1]} codeword pairs, cap is {max_pairs}")
    words = []
    for k in range(2):
        rng = np.random.default_rng([cfg.seed, 0, k])
        cw = rng.choice(len(pmfs[k]), size=(totals[k], cfg.n), p=pmfs[k])
        cw.setflags(write=False)
        words.append(cw)
    return Codebook(ch, tuple(pmfs), cfg, tuple(words))


def encode(cb: Codebook, k: int, m: int, w: int, rng: np.random.Generator) -> int:
    """Uniform codeword index from the bin of ``(m, w)``."""
    b = cb.bin(k, m, w)
    return b.start + int(rng.integers(len(b)))


# --- typicality --------------------------------------------------------------


def typical_set_test(seq, pmf, eps: float) -> bool:
    """Robust typicality: ``|freq(a) - p(a)| <= eps p(a)`` for every symbol ``a``."""
    pmf = np.asarray(pmf, dtype=float).ravel()
    seq = np.asarray(seq, dtype=int).ravel()
    if seq.size == 0:
        return True
    if seq.min() < 0 or seq.max() >= pmf.size:
        return False
    freq = np.bincount(seq, minlength=pmf.size) / seq.size
    return bool(np.all(np.abs(freq - pmf) <= eps * pmf + 1e-12))


def _typical_mask(symbols: np.ndarray, pmf: np.ndarray, eps: float) -> np.ndarray:
    """Typicality of every row along the last axis of an integer symbol array."""
    counts = (symbols[..., None] == np.arange(pmf.size)).sum(axis=-2)
    freq = counts / symbols.shape[-1]
    return np.all(np.abs(freq - pmf) <= eps * pmf + 1e-12, axis=-1)


class _PairSymbols:
    """Joint symbol index ``x1 * |X2| + x2`` of every codeword pair, shape ``(L1, L2, n)``."""

    def __init__(self, cb: Codebook):
        c1, c2 = cb.codewords
        self.pairs = c1[:, None, :] * cb.channel.input_sizes[1] + c2[None, :, :]
        self.pxy = joint_distribution(cb.channel, cb.inputs).sum(axis=-1).ravel()


def decode(cb: Codebook, y, eps: float | None = None, _pairs: _PairSymbols | None = None):
    """Unique ``(m1, w1, m2, w2)`` with some jointly typical codeword pair, else ``None``."""
    eps = cb.config.eps if eps is None else eps
    y = np.asarray(y, dtype=int)
    pairs = _pairs or _PairSymbols(cb)
    sym = pairs.pairs * cb.channel.y_size + y
    hits = np.argwhere(_typical_mask(sym, pairs.pxy, eps))
    found = {cb.messages_of(0, int(l1)) + cb.messages_of(1, int(l2)) for l1, l2 in hits}
    if len(found) != 1:
        return None
    return found.pop()


def _sample_outputs(ch: DMWiretapChannel, x1, x2, rng) -> tuple[np.ndarray, np.ndarray]:
    rows = ch.transition[x1, x2].reshape(len(x1), -1)
    cdf = np.cumsum(rows, axis=1)
    u = rng.random(len(x1))[:, None]
    idx = np.minimum((u >= cdf).sum(axis=1), rows.shape[1] - 1)
    return idx // ch.z_size, idx % ch.z_size


# --- eavesdropper statistics -------------------------------------------------


class NStatistic(NamedTuple):
    count: int
    z_typical: bool


def n_statistic(cb: Codebook, z, m1: int, m2: int, eps: float | None = None) -> NStatistic:
    """Number of index pairs in the subcodebooks of ``(m1, m2)`` jointly typical with ``z``.

    ``z_typical`` marks whether ``z`` itself is typical for the eavesdropper marginal.
    """
    eps = cb.config.eps if eps is None else eps
    z = np.asarray(z, dtype=int)
    joint = joint_distribution(cb.channel, cb.inputs).sum(axis=-2)  # p(x1, x2, z)
    pz = joint.sum(axis=(0, 1))
    r1, r2 = cb.subcodebook(0, m1), cb.subcodebook(1, m2)
    c1 = cb.codewords[0][r1.start : r1.stop]
    c2 = cb.codewords[1][r2.start : r2.stop]
    sym = (c1[:, None, :] * cb.channel.input_sizes[1] + c2[None, :, :]) * cb.channel.z_size + z
    count = int(_typical_mask(sym, joint.ravel(), eps).sum())
    return NStatistic(count, typical_set_test(z, pz, eps))


@dataclass(frozen=True)
class Theorem3Bounds:
    mean_bound: float
    var_bound: float
    delta: float
    delta_k: tuple[float, float]
    delta1: float


def theorem3_bounds(mi: MIBundle, cfg: CodeConfig, effective: bool = True) -> Theorem3Bounds:
    """Expectation and variance bounds on the N statistic, with ``delta_1 = 5 eps``.

    ``delta = sum_k (R_ko + R_kg) - I(X1,X2;Z)``, ``delta_k = R_ko + R_kg - I(X_k;Z)``.
    """
    rates = cfg.effective_rates() if effective else cfg.rates
    n = cfg.n
    d1 = 5 * cfg.eps
    spread = [r.open + r.guard for r in rates]
    delta = sum(spread) - float(mi.eve({1, 2}))
    dk = tuple(spread[k] - float(mi.eve({k + 1})) for k in range(2))
    mean = 2.0 ** (n * (delta + d1))
    var = mean + sum(2.0 ** (n * (2 * delta - d + d1)) for d in dk)
    return Theorem3Bounds(mean, var, delta, dk, d1)


# --- exact leakage -----------------------------------------------------------


def _h(p: np.ndarray, axis=-1) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(p > 0, -p * np.log2(p), 0.0)
    return t.sum(axis=axis)


@dataclass(frozen=True)
class LeakageResult:
    n: int
    joint_bits: float  # I(M1, M2; Z^n)
    user_bits: tuple[float, float]  # I(M_k; Z^n)
    h_messages: float  # H(M1, M2)
    h_index_given_z: float  # H(L1, L2 | Z^n)
    h_index_given_mz: float  # H(L1, L2 | M1, M2, Z^n)
    chain_residual: float
    mass_residual: float

    @property
    def rate(self) -> float:
        return self.joint_bits / self.n

    @property
    def user_rates(self) -> tuple[float, float]:
        return tuple(b / self.n for b in self.user_bits)


def _z_given_pairs(pz: np.ndarray, c1: np.ndarray, c2: np.ndarray) -> np.ndarray:
    """``p(z^n | x1^n, x2^n)`` for every codeword pair, shape ``(|c1| * |c2|, |Z|^n)``."""
    a, b = len(c1), len(c2)
    out = np.ones((a, b, 1))
    for i in range(c1.shape[1]):
        step = pz[c1[:, i][:, None], c2[:, i][None, :], :]  # (a, b, |Z|)
        out = (out[..., :, None] * step[..., None, :]).reshape(a, b, -1)
    return out.reshape(a * b, -1)


def exact_leakage(cb: Codebook, max_atoms: int = MAX_LEAKAGE_ATOMS, max_work: int = MAX_LEAKAGE_WORK) -> LeakageResult:
    """Exact ``I(M1, M2; Z^n)`` and ``I(M_k; Z^n)`` for a fixed codebook with uniform messages."""
    ch = cb.channel
    n = cb.n
    m1n, m2n = cb.sizes(0)[0], cb.sizes(1)[0]
    zn = ch.z_size**n
    if m1n * m2n * zn > max_atoms:
        raise CapExceeded(f"{m1n * m2n * zn} leakage atoms exceed cap {max_atoms}")
    l1, l2 = len(cb.codewords[0]), len(cb.codewords[1])
    if l1 * l2 * zn > max_work:
        raise CapExceeded(f"{l1 * l2 * zn} codeword-pair atoms exceed cap {max_work}")
    pz = ch.eve_channel()
    cond = np.empty((m1n, m2n, zn))  # p(z^n | m1, m2)
    h_z_given_l = 0.0
    for a in range(m1n):
        r1 = cb.subcodebook(0, a)
        for b in range(m2n):
            r2 = cb.subcodebook(1, b)
            block = _z_given_pairs(pz, cb.codewords[0][r1.start : r1.stop], cb.codewords[1][r2.start : r2.stop])
            cond[a, b] = block.mean(axis=0)
            h_z_given_l += _h(block).mean()
    h_z_given_l /= m1n * m2n
    mass_residual = float(np.abs(cond.sum(axis=-1) - 1.0).max())
    pz_marg = cond.mean(axis=(0, 1))
    h_z = float(_h(pz_marg))
    h_z_given_m = float(_h(cond).mean())
    joint = h_z - h_z_given_m
    user1 = h_z - float(_h(cond.mean(axis=1)).mean())
    user2 = h_z - float(_h(cond.mean(axis=0)).mean())
    h_m = math.log2(m1n * m2n)
    h_l = math.log2(l1 * l2)
    h_l_given_z = h_l - (h_z - h_z_given_l)
    h_l_given_mz = (h_l - h_m) - (h_z_given_m - h_z_given_l)
    chain = joint - (h_m - h_l_given_z + h_l_given_mz)
    return LeakageResult(
        n,
        joint,
        (user1, user2),
        h_m,
        h_l_given_z,
        h_l_given_mz,
        abs(chain),
        mass_residual,
    )


# --- Monte Carlo driver ------------------------------------------------------


@dataclass
class SimResult:
    seed: int
    n: int
    trials: int
    errors: int
    pe: float
    leakage_rate: float | None
    user_leakage_rates: tuple[float, float] | None
    superadditivity_gap: float | None
    n_stat_mean: float | None
    n_stat_var: float | None
    n_stat_samples: int
    bounds: Theorem3Bounds
    index_equivocation: float | None  # (1/n) H(L1, L2 | M1, M2, Z^n)
    rate_adjustment: list = field(default_factory=list)

    @property
    def equivocation_bound(self) -> float:
        """``delta + delta_1 + 1/n``; the vanishing atypicality terms are left out."""
        return self.bounds.delta + self.bounds.delta1 + 1 / self.n

    @property
    def margins(self) -> dict:
        """Bound minus observed value; negative means the finite-n check is violated."""
        out = {"n_stat_mean": None, "n_stat_var": None, "equivocation": None}
        if self.n_stat_mean is not None:
            out["n_stat_mean"] = self.bounds.mean_bound - self.n_stat_mean
            out["n_stat_var"] = self.bounds.var_bound - self.n_stat_var
        if self.index_equivocation is not None:
            out["equivocation"] = self.equivocation_bound - self.index_equivocation
        return out

    def to_json(self) -> dict:
        d = asdict(self)
        d["bounds"] = asdict(self.bounds)
        d["equivocation_bound"] = self.equivocation_bound
        d["margins"] = self.margins
        return d

    def csv_row(self) -> dict:
        return {
            "seed": self.seed,
            "n": self.n,
            "trials": self.trials,
            "pe": self.pe,
            "leakage_rate": self.leakage_rate,
            "n_stat_mean": self.n_stat_mean,
            "mean_bound": self.bounds.mean_bound,
            "var_bound": self.bounds.var_bound,
            "delta": self.bounds.delta,
            "delta_1": self.bounds.delta_k[0],
            "delta_2": self.bounds.delta_k[1],
            "mean_margin": self.margins["n_stat_mean"],
            "index_equivocation": self.index_equivocation,
            "equivocation_margin": self.margins["equivocation"],
        }


CSV_FIELDS = [
    "seed",
    "n",
    "trials",
    "pe",
    "leakage_rate",
    "n_stat_mean",
    "mean_bound",
    "var_bound",
    "delta",
    "delta_1",
    "delta_2",
    "mean_margin",
    "index_equivocation",
    "equivocation_margin",
]


def results_csv(results: Sequence[SimResult]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in results:
        row = r.csv_row()
        w.writerow({k: ("" if v is None else (f"{v:.12g}" if isinstance(v, float) else v)) for k, v in row.items()})
    return buf.getvalue()


def run_trials(
    ch: DMWiretapChannel,
    px,
    cfg: CodeConfig,
    trials: int,
    leakage: bool = True,
    n_stat_samples: int = 200,
) -> SimResult:
    """Monte Carlo error probability with a fixed codebook; trial ``t`` uses stream ``(seed, 1, t)``.

    Messages are uniform and channel noise is fresh per trial.  The N
    statistic is recorded on the first ``n_stat_samples`` trials whose
    eavesdropper output is typical.
    """
    if trials < 1:
        raise SimulationError("trials must be at least 1")
    cb = generate_codebooks(ch, px, cfg)
    pairs = _PairSymbols(cb)
    sizes = [cb.sizes(0), cb.sizes(1)]
    errors = 0
    n_values = []
    for t in range(trials):
        rng = np.random.default_rng([cfg.seed, 1, t])
        msgs = [(int(rng.integers(s[0])), int(rng.integers(s[1]))) for s in sizes]
        idx = [encode(cb, k, *msgs[k], rng) for k in range(2)]
        y, z = _sample_outputs(ch, cb.codewords[0][idx[0]], cb.codewords[1][idx[1]], rng)
        if decode(cb, y, _pairs=pairs) != msgs[0] + msgs[1]:
            errors += 1
        if len(n_values) < n_stat_samples:
            stat = n_statistic(cb, z, msgs[0][0], msgs[1][0])
            if stat.z_typical:
                n_values.append(stat.count)
    mi = mi_bundle(ch, px)
    leak = exact_leakage(cb) if leakage else None
    return SimResult(
        seed=cfg.seed,
        n=cfg.n,
        trials=trials,
        errors=errors,
        pe=errors / trials,
        leakage_rate=leak.rate if leak else None,
        user_leakage_rates=leak.user_rates if leak else None,
        superadditivity_gap=(leak.joint_bits - sum(leak.user_bits)) if leak else None,
        n_stat_mean=float(np.mean(n_values)) if n_values else None,
        n_stat_var=float(np.var(n_values)) if n_values else None,
        n_stat_samples=len(n_values),
        bounds=theorem3_bounds(mi, cfg),
        index_equivocation=leak.h_index_given_mz / cfg.n if leak else None,
        rate_adjustment=cfg.rate_adjustment(),
    )
