"""Control functions phi(x, y) and the scaling-decay diagnostics.

The power family is ``phi = epsilon * ||x||^p * ||y||^q`` with the
conventions ``0^0 = 1`` and ``0^e = +inf`` for ``e < 0`` (a value of +inf
means "no constraint at this pair").  A tabulated family is supported so the
harness is not married to closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import UnsupportedRegimeError

__all__ = [
    "PowerControl",
    "TableControl",
    "PairDecay",
    "DecayReport",
    "suggest_c",
    "check_decay_conditions",
]


def _power_factor(t: float, e: float) -> float:
    if t > 0.0:
        return t ** e
    if e == 0.0:
        return 1.0
    return 0.0 if e > 0.0 else math.inf


@dataclass(frozen=True)
class PowerControl:
    """phi(x, y) = epsilon * ||x||^p * ||y||^q together with a scale constant c."""

    epsilon: float
    p: float
    q: float
    c: float

    def __post_init__(self) -> None:
        if self.epsilon <= 0.0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.c <= 0.0 or self.c == 1.0:
            raise ValueError(f"scale constant must be positive and != 1, got {self.c}")

    @property
    def family(self) -> str:
        return "power"

    def evaluate(self, nx: float, ny: float) -> float:
        """Value at a pair of norms; +inf factors dominate zero factors."""
        fx = _power_factor(nx, self.p)
        fy = _power_factor(ny, self.q)
        if math.isinf(fx) or math.isinf(fy):
            return math.inf
        return self.epsilon * fx * fy

    def describe(self) -> dict:
        return {"family": "power", "epsilon": self.epsilon, "p": self.p,
                "q": self.q, "c": self.c}


@dataclass(frozen=True)
class TableControl:
    """phi given by values on an explicit grid of norm pairs.

    Keys are rounded to 12 decimal digits on lookup; a missing pair is an
    error rather than a silent extrapolation.
    """

    table: dict
    c: float
    key_digits: int = 12

    def __post_init__(self) -> None:
        if self.c <= 0.0 or self.c == 1.0:
            raise ValueError(f"scale constant must be positive and != 1, got {self.c}")
        rounded = {}
        for (nx, ny), v in dict(self.table).items():
            rounded[self._key(nx, ny)] = float(v)
        object.__setattr__(self, "table", rounded)

    def _key(self, nx: float, ny: float):
        return (round(float(nx), self.key_digits),
                round(float(ny), self.key_digits))

    @property
    def family(self) -> str:
        return "table"

    def evaluate(self, nx: float, ny: float) -> float:
        key = self._key(nx, ny)
        try:
            return self.table[key]
        except KeyError:
            raise ValueError(f"control table has no value at norms {key}") from None

    def describe(self) -> dict:
        return {"family": "table", "c": self.c, "entries": len(self.table)}


def suggest_c(p: float, q: float) -> float:
    """Scaling constant for the power family: 2 if p,q > 1, 1/2 if p,q < 1.

    The mixed regime (p - 1)(q - 1) <= 0, which includes p = q = 1, has no
    admissible constant and raises.
    """
    if p > 1.0 and q > 1.0:
        return 2.0
    if p < 1.0 and q < 1.0:
        return 0.5
    raise UnsupportedRegimeError(
        f"no scaling constant for exponents p={p}, q={q}: "
        "need both above 1 or both below 1")


@dataclass
class PairDecay:
    """Decay diagnostics for one pair of sample norms."""

    nx: float
    ny: float
    seq_scaled_first: list    # c^n * phi(c^-n nx, ny)
    seq_scaled_second: list   # c^n * phi(nx, c^-n ny)
    seq_quadratic: list       # c^2n * phi(c^-n nx, c^-n nx)
    pass_first: bool
    pass_second: bool
    pass_bounded: bool

    def to_dict(self) -> dict:
        return {
            "nx": self.nx, "ny": self.ny,
            "pass_first": self.pass_first,
            "pass_second": self.pass_second,
            "pass_bounded": self.pass_bounded,
            "first_terms": [_json_float(v) for v in self.seq_scaled_first],
            "second_terms": [_json_float(v) for v in self.seq_scaled_second],
            "quadratic_terms": [_json_float(v) for v in self.seq_quadratic],
        }


@dataclass
class DecayReport:
    """Verdict on the two scaling-decay hypotheses for a control function.

    Condition (a): both singly-scaled sequences tend to zero.  Condition (b):
    the quadratically-scaled diagonal sequence stays bounded.  For the power
    family the verdicts come from the closed-form step ratios (c^(1-p),
    c^(1-q), c^(2-p-q)); the numeric sequences are reported alongside.  For a
    tabulated control only the numeric evidence is available.
    """

    family: str
    c: float
    n_terms: int
    condition_a: bool
    condition_b: bool
    ratio_first: float | None
    ratio_second: float | None
    ratio_quadratic: float | None
    observed_ratio_first: float | None
    observed_ratio_second: float | None
    pairs: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.condition_a and self.condition_b

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "c": self.c,
            "n_terms": self.n_terms,
            "condition_a": self.condition_a,
            "condition_b": self.condition_b,
            "passed": self.passed,
            "ratio_first": _json_float(self.ratio_first),
            "ratio_second": _json_float(self.ratio_second),
            "ratio_quadratic": _json_float(self.ratio_quadratic),
            "observed_ratio_first": _json_float(self.observed_ratio_first),
            "observed_ratio_second": _json_float(self.observed_ratio_second),
            "pairs": [p.to_dict() for p in self.pairs],
        }


def _json_float(v):
    if v is None:
        return None
    v = float(v)
    return v if math.isfinite(v) else repr(v)


def _seq_decays(seq, decay_factor: float) -> bool:
    first, last = seq[0], seq[-1]
    if any(math.isinf(v) or math.isnan(v) for v in seq):
        return False
    if first == 0.0:
        return last == 0.0
    return last <= decay_factor * first


def _seq_bounded(seq, bound_factor: float, explicit_bound) -> bool:
    if any(math.isinf(v) or math.isnan(v) for v in seq):
        return False
    if explicit_bound is not None:
        return max(seq) <= explicit_bound
    return max(seq) <= bound_factor * max(seq[0], 1e-300)


def _observed_ratio(seqs) -> float | None:
    ratios = []
    for seq in seqs:
        for a, b in zip(seq, seq[1:]):
            if math.isfinite(a) and math.isfinite(b) and a > 0.0:
                ratios.append(b / a)
    if not ratios:
        return None
    return float(np.median(ratios))


def check_decay_conditions(phi, norm_pairs, n_terms: int = 40,
                           decay_factor: float = 1e-3,
                           bound_factor: float = 10.0,
                           explicit_bound: float | None = None) -> DecayReport:
    """Probe the scaling-decay hypotheses on a list of (||x||, ||y||) pairs.

    For every pair three sequences over n = 0..n_terms are tabulated: the two
    singly-scaled ones (first slot scaled, second slot scaled) and the
    quadratically-scaled diagonal one.  Condition (a) asks the first two to
    decay, condition (b) asks the third to stay bounded.  Power controls are
    judged by their exact geometric ratios; tabulated controls by the numeric
    sequences (decay below ``decay_factor`` times the first term, bounded by
    ``explicit_bound`` or ``bound_factor`` times the first term).
    """
    c = phi.c
    pairs = []
    for nx, ny in norm_pairs:
        nx = float(nx)
        ny = float(ny)
        seq_a1 = []
        seq_a2 = []
        seq_b = []
        for n in range(n_terms + 1):
            cn = c ** n
            inv = c ** (-n)
            seq_a1.append(cn * phi.evaluate(inv * nx, ny))
            seq_a2.append(cn * phi.evaluate(nx, inv * ny))
            seq_b.append(cn * cn * phi.evaluate(inv * nx, inv * nx))
        pairs.append(PairDecay(
            nx=nx, ny=ny,
            seq_scaled_first=seq_a1,
            seq_scaled_second=seq_a2,
            seq_quadratic=seq_b,
            pass_first=_seq_decays(seq_a1, decay_factor),
            pass_second=_seq_decays(seq_a2, decay_factor),
            pass_bounded=_seq_bounded(seq_b, bound_factor, explicit_bound),
        ))

    if phi.family == "power":
        ratio_first = c ** (1.0 - phi.p)
        ratio_second = c ** (1.0 - phi.q)
        ratio_quadratic = c ** (2.0 - phi.p - phi.q)
        condition_a = ratio_first < 1.0 and ratio_second < 1.0
        condition_b = ratio_quadratic <= 1.0
    else:
        ratio_first = ratio_second = ratio_quadratic = None
        condition_a = all(p.pass_first and p.pass_second for p in pairs)
        condition_b = all(p.pass_bounded for p in pairs)

    return DecayReport(
        family=phi.family,
        c=c,
        n_terms=n_terms,
        condition_a=condition_a,
        condition_b=condition_b,
        ratio_first=ratio_first,
        ratio_second=ratio_second,
        ratio_quadratic=ratio_quadratic,
        observed_ratio_first=_observed_ratio(
            [p.seq_scaled_first for p in pairs]),
        observed_ratio_second=_observed_ratio(
            [p.seq_scaled_second for p in pairs]),
        pairs=pairs,
    )
