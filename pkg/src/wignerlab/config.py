"""Experiment configuration: YAML loading, validation, auto resolution.

A config file is a small YAML document with the sections below.  Unknown
keys anywhere are rejected, so typos fail loudly instead of silently
running with defaults.

seed: 1234
algebra:        {block_sizes: [2, 1]}
module:         {rank: 3}
control:        {epsilon: 1.0e-2, p: 2.0, q: 2.0, c: auto}
map:            {delta: 1.0e-3, r: auto, phase_mode: oscillating,
                 cycle_length: 8}
samples:        {points: 50, orth_pairs: 20, nonorth_pairs: 20,
                 probe_pairs: 40}
stability:      {n_max: 40, cluster_tol: 1.0e-6, normality_tol: 1.0e-6,
                 rank_tol: 1.0e-8, min_cluster: 3, tail_fraction: 0.8}
checks:         {check_tol: 1.0e-6, wigner_slack: 1.0e-11, margin: 0.1,
                 exact_wigner: auto}
certification:  {slack: 1.0e-11, max_halvings: 8}
output:         {out_dir: out, format: both}
tamper:         {mode: scale_exact, point_index: 0, factor: 1.1}  # optional

"auto" resolution: c is chosen from the exponents (2 when p, q > 1, 1/2
when p, q < 1), r becomes (p + q) / 2, the oscillating phase rate alpha is
derived from cycle_length so the phase walks a cycle of that length along
the scaling orbit, and exact_wigner turns on exactly when every block has
size 1.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import yaml

from .control import suggest_c
from .exceptions import ConfigError, UnsupportedRegimeError

__all__ = ["ExperimentConfig", "load_config", "config_from_dict"]

_FORMATS = ("json", "csv", "both")
_PHASE_MODES = ("constant", "oscillating")
_TAMPER_MODES = ("scale_exact",)


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved, validated experiment description."""

    seed: int = 1234
    block_sizes: tuple = (2, 1)
    rank: int = 3
    epsilon: float = 1e-2
    p: float = 2.0
    q: float = 2.0
    c: float = 2.0
    delta: float = 1e-3
    r: float = 2.0
    phase_mode: str = "oscillating"
    alpha: float = 0.0
    cycle_length: int = 0
    n_points: int = 50
    orth_pairs: int = 20
    nonorth_pairs: int = 20
    probe_pairs: int = 40
    n_max: int = 40
    cluster_tol: float = 1e-6
    normality_tol: float = 1e-6
    rank_tol: float = 1e-8
    min_cluster: int = 3
    tail_fraction: float = 0.8
    check_tol: float = 1e-6
    wigner_slack: float = 1e-11
    margin: float = 0.1
    exact_wigner: bool = False
    cert_slack: float = 1e-11
    max_halvings: int = 8
    out_dir: str = "out"
    format: str = "both"
    tamper_mode: str = ""
    tamper_point: int = 0
    tamper_factor: float = 1.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["block_sizes"] = list(self.block_sizes)
        return d


def _require_mapping(name: str, value) -> dict:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"section '{name}' must be a mapping")
    return value


def _take(section: dict, name: str, key: str, default, kind):
    if key not in section:
        if default is None:
            raise ConfigError(f"missing required key '{name}.{key}'")
        return default
    value = section.pop(key)
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"'{name}.{key}' must be a number, got {value!r}")
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"'{name}.{key}' must be an integer, "
                              f"got {value!r}")
        return value
    if kind is str:
        if not isinstance(value, str):
            raise ConfigError(f"'{name}.{key}' must be a string, "
                              f"got {value!r}")
        return value
    return value


def _reject_leftovers(name: str, section: dict) -> None:
    if section:
        keys = ", ".join(sorted(section))
        raise ConfigError(f"unknown key(s) in '{name}': {keys}")


def config_from_dict(raw: dict) -> ExperimentConfig:
    """Validate a parsed YAML document and resolve every 'auto' knob."""
    if not isinstance(raw, dict):
        raise ConfigError("config document must be a mapping")
    raw = dict(raw)

    seed = _take(raw, "", "seed", 1234, int)

    alg = _require_mapping("algebra", raw.pop("algebra", {}))
    blocks = alg.pop("block_sizes", [2, 1])
    if (not isinstance(blocks, list) or not blocks
            or any(isinstance(b, bool) or not isinstance(b, int) or b < 1
                   for b in blocks)):
        raise ConfigError("'algebra.block_sizes' must be a nonempty list of "
                          "integers >= 1")
    _reject_leftovers("algebra", alg)
    block_sizes = tuple(blocks)

    mod = _require_mapping("module", raw.pop("module", {}))
    rank = _take(mod, "module", "rank", 3, int)
    _reject_leftovers("module", mod)
    if rank < 1:
        raise ConfigError("'module.rank' must be >= 1")

    ctl = _require_mapping("control", raw.pop("control", {}))
    epsilon = _take(ctl, "control", "epsilon", 1e-2, float)
    p = _take(ctl, "control", "p", 2.0, float)
    q = _take(ctl, "control", "q", 2.0, float)
    c_raw = ctl.pop("c", "auto")
    _reject_leftovers("control", ctl)
    if epsilon <= 0:
        raise ConfigError("'control.epsilon' must be > 0")
    if c_raw == "auto":
        try:
            c = suggest_c(p, q)
        except UnsupportedRegimeError as exc:
            raise ConfigError(f"cannot resolve control.c automatically: {exc}")
    elif isinstance(c_raw, (int, float)) and not isinstance(c_raw, bool):
        c = float(c_raw)
    else:
        raise ConfigError(f"'control.c' must be a number or 'auto', "
                          f"got {c_raw!r}")
    if c <= 0 or c == 1.0:
        raise ConfigError("'control.c' must be positive and different from 1")

    mp = _require_mapping("map", raw.pop("map", {}))
    delta = _take(mp, "map", "delta", 1e-3, float)
    r_raw = mp.pop("r", "auto")
    phase_mode = _take(mp, "map", "phase_mode", "oscillating", str)
    cycle_length = _take(mp, "map", "cycle_length", 0, int)
    alpha_raw = mp.pop("alpha", None)
    _reject_leftovers("map", mp)
    if delta < 0:
        raise ConfigError("'map.delta' must be >= 0")
    if r_raw == "auto":
        r = 0.5 * (p + q)
    elif isinstance(r_raw, (int, float)) and not isinstance(r_raw, bool):
        r = float(r_raw)
    else:
        raise ConfigError(f"'map.r' must be a number or 'auto', got {r_raw!r}")
    if phase_mode not in _PHASE_MODES:
        raise ConfigError(f"'map.phase_mode' must be one of {_PHASE_MODES}")
    alpha = 0.0
    if phase_mode == "oscillating":
        if alpha_raw is not None and cycle_length:
            raise ConfigError("'map.alpha' and 'map.cycle_length' are "
                              "mutually exclusive")
        if alpha_raw is not None:
            if isinstance(alpha_raw, bool) or not isinstance(
                    alpha_raw, (int, float)):
                raise ConfigError("'map.alpha' must be a number")
            alpha = float(alpha_raw)
        else:
            if not cycle_length:
                cycle_length = 8
            if cycle_length < 1:
                raise ConfigError("'map.cycle_length' must be >= 1")
            alpha = 2.0 * math.pi / (cycle_length * abs(math.log(c)))
    elif alpha_raw is not None or cycle_length:
        raise ConfigError("'map.alpha'/'map.cycle_length' require "
                          "phase_mode: oscillating")
    if delta > 0 and rank < 2:
        raise ConfigError("'map.delta' > 0 needs 'module.rank' >= 2: the "
                          "perturbation direction is built orthogonal to "
                          "the core value at each point")

    smp = _require_mapping("samples", raw.pop("samples", {}))
    n_points = _take(smp, "samples", "points", 50, int)
    orth_pairs = _take(smp, "samples", "orth_pairs", 20, int)
    nonorth_pairs = _take(smp, "samples", "nonorth_pairs", 20, int)
    probe_pairs = _take(smp, "samples", "probe_pairs", 40, int)
    _reject_leftovers("samples", smp)
    for label, v in (("points", n_points), ("orth_pairs", orth_pairs),
                     ("nonorth_pairs", nonorth_pairs),
                     ("probe_pairs", probe_pairs)):
        if v < 0:
            raise ConfigError(f"'samples.{label}' must be >= 0")
    if orth_pairs > 0 and rank < 2:
        raise ConfigError("'samples.orth_pairs' > 0 needs 'module.rank' >= 2 "
                          "to build orthogonal pairs on disjoint slots")

    stab = _require_mapping("stability", raw.pop("stability", {}))
    n_max = _take(stab, "stability", "n_max", 40, int)
    cluster_tol = _take(stab, "stability", "cluster_tol", 1e-6, float)
    normality_tol = _take(stab, "stability", "normality_tol", 1e-6, float)
    rank_tol = _take(stab, "stability", "rank_tol", 1e-8, float)
    min_cluster = _take(stab, "stability", "min_cluster", 3, int)
    tail_fraction = _take(stab, "stability", "tail_fraction", 0.8, float)
    _reject_leftovers("stability", stab)
    if n_max < 2:
        raise ConfigError("'stability.n_max' must be >= 2")
    for label, v in (("cluster_tol", cluster_tol),
                     ("normality_tol", normality_tol),
                     ("rank_tol", rank_tol)):
        if v <= 0:
            raise ConfigError(f"'stability.{label}' must be > 0")
    if min_cluster < 2:
        raise ConfigError("'stability.min_cluster' must be >= 2")
    if not 0.0 < tail_fraction <= 1.0:
        raise ConfigError("'stability.tail_fraction' must be in (0, 1]")

    chk = _require_mapping("checks", raw.pop("checks", {}))
    check_tol = _take(chk, "checks", "check_tol", 1e-6, float)
    wigner_slack = _take(chk, "checks", "wigner_slack", 1e-11, float)
    margin = _take(chk, "checks", "margin", 0.1, float)
    exact_raw = chk.pop("exact_wigner", "auto")
    _reject_leftovers("checks", chk)
    if check_tol <= 0 or wigner_slack <= 0 or margin <= 0:
        raise ConfigError("'checks' tolerances must be > 0")
    abelian = all(b == 1 for b in block_sizes)
    if exact_raw == "auto":
        exact_wigner = abelian
    elif isinstance(exact_raw, bool):
        exact_wigner = exact_raw
        if exact_wigner and not abelian:
            raise ConfigError("'checks.exact_wigner: true' needs an abelian "
                              "algebra (all block sizes 1)")
    else:
        raise ConfigError("'checks.exact_wigner' must be a bool or 'auto'")

    cert = _require_mapping("certification", raw.pop("certification", {}))
    cert_slack = _take(cert, "certification", "slack", 1e-11, float)
    max_halvings = _take(cert, "certification", "max_halvings", 8, int)
    _reject_leftovers("certification", cert)
    if cert_slack <= 0:
        raise ConfigError("'certification.slack' must be > 0")
    if max_halvings < 0:
        raise ConfigError("'certification.max_halvings' must be >= 0")

    out = _require_mapping("output", raw.pop("output", {}))
    out_dir = _take(out, "output", "out_dir", "out", str)
    fmt = _take(out, "output", "format", "both", str)
    _reject_leftovers("output", out)
    if fmt not in _FORMATS:
        raise ConfigError(f"'output.format' must be one of {_FORMATS}")

    tamper_mode, tamper_point, tamper_factor = "", 0, 1.0
    if "tamper" in raw:
        tam = _require_mapping("tamper", raw.pop("tamper"))
        if tam:
            tamper_mode = _take(tam, "tamper", "mode", None, str)
            tamper_point = _take(tam, "tamper", "point_index", 0, int)
            tamper_factor = _take(tam, "tamper", "factor", 1.1, float)
            _reject_leftovers("tamper", tam)
            if tamper_mode not in _TAMPER_MODES:
                raise ConfigError(
                    f"'tamper.mode' must be one of {_TAMPER_MODES}")
            if tamper_point < 0:
                raise ConfigError("'tamper.point_index' must be >= 0")

    _reject_leftovers("config", raw)

    return ExperimentConfig(
        seed=seed, block_sizes=block_sizes, rank=rank,
        epsilon=epsilon, p=p, q=q, c=c,
        delta=delta, r=r, phase_mode=phase_mode, alpha=alpha,
        cycle_length=cycle_length,
        n_points=n_points, orth_pairs=orth_pairs,
        nonorth_pairs=nonorth_pairs, probe_pairs=probe_pairs,
        n_max=n_max, cluster_tol=cluster_tol, normality_tol=normality_tol,
        rank_tol=rank_tol, min_cluster=min_cluster,
        tail_fraction=tail_fraction,
        check_tol=check_tol, wigner_slack=wigner_slack, margin=margin,
        exact_wigner=exact_wigner,
        cert_slack=cert_slack, max_halvings=max_halvings,
        out_dir=out_dir, format=fmt,
        tamper_mode=tamper_mode, tamper_point=tamper_point,
        tamper_factor=tamper_factor,
    )


def load_config(path) -> ExperimentConfig:
    """Read and validate a YAML config file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except yaml.YAMLError as exc:
        raise ConfigError(f"config file is not valid YAML: {exc}")
    if raw is None:
        raw = {}
    return config_from_dict(raw)
