"""Experiment configuration files.

A config is an INI file; one file fully determines an experiment::

    [experiment]
    name = comparison
    kind = compare            # simulate | compare | shape | death
    seed = 1

    [model]
    graph = tree(2, depth=6)
    walker = srw
    rules = iid(poisson(1, 1e-12)); deterministic(1)
    horizons = 2000
    replicas = 2000

    [order]
    kind = pgf
    t_grid = 64
    bootstrap_reps = 2000
    level = 0.95

    [shape]                   # kind = shape only
    direction = 1, 0
    n_max = 30

    [death]                   # kind = death only
    p_list = 0.5, 0.6, 0.7
    threshold = 300

    [output]
    path = results.jsonl
"""

from __future__ import annotations

import configparser
import hashlib
import json
import re
from dataclasses import asdict, dataclass, replace
from pathlib import Path

from .graph import GraphKind
from .init_config import IID, ConfigError, Deterministic, Pmf, SiteDependentBernoulli, bernoulli, point, poisson, two_point
from .orders import OrderKind
from .paths import BiasedZ, ExplicitTable, NonbacktrackingStoppedAtLeaves, PathTable, SRW, SRWWithDeath

KINDS = ("simulate", "compare", "shape", "death")

_CALL = re.compile(r"\s*(\w+)\s*\((.*)\)\s*$", re.S)


def _args(text: str) -> list[str]:
    return [a.strip() for a in text.split(",") if a.strip()]


def parse_pmf(text: str) -> Pmf:
    """``point(k)``, ``bernoulli(p)``, ``two_point(k, k1, q)``, ``poisson(mu[, eps])`` or a dict literal."""
    text = text.strip()
    if text.startswith("{"):
        return Pmf.parse(text)
    m = _CALL.match(text)
    if not m:
        raise ConfigError(f"bad pmf {text!r}")
    name, a = m.group(1), _args(m.group(2))
    try:
        if name == "point":
            return point(int(a[0]))
        if name == "bernoulli":
            return bernoulli(float(a[0]))
        if name == "two_point":
            return two_point(int(a[0]), int(a[1]), float(a[2]))
        if name == "poisson":
            return poisson(float(a[0]), *(float(x) for x in a[1:2]))
    except (IndexError, ValueError) as exc:
        raise ConfigError(f"bad pmf {text!r}: {exc}") from None
    raise ConfigError(f"unknown pmf {name!r}")


def parse_rule(text: str):
    m = _CALL.match(text)
    if not m:
        raise ConfigError(f"bad rule {text!r}")
    name, body = m.group(1), m.group(2)
    if name == "deterministic":
        return Deterministic(int(body))
    if name == "iid":
        return IID(parse_pmf(body))
    if name == "site_bernoulli":
        return SiteDependentBernoulli(float(body))
    raise ConfigError(f"unknown rule {name!r}")


def parse_walker(text: str):
    text = text.strip()
    if text == "srw":
        return SRW()
    if text == "nonbacktracking":
        return NonbacktrackingStoppedAtLeaves()
    m = _CALL.match(text)
    if m and m.group(1) == "biased":
        return BiasedZ(float(m.group(2)))
    if m and m.group(1) == "srw_death":
        return SRWWithDeath(float(m.group(2)))
    if m and m.group(1) == "table":
        return ExplicitTable(PathTable.load(m.group(2).strip()))
    raise ConfigError(f"unknown walker {text!r}")


def _ints(text: str) -> tuple:
    return tuple(int(x) for x in _args(text))


def _floats(text: str) -> tuple:
    return tuple(float(x) for x in _args(text))


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    kind: str
    graph: str
    walker: str = "srw"
    rules: tuple = ()
    horizons: tuple = (100,)
    replicas: int = 100
    seed: int = 0
    order_kind: str = "pgf"
    t_grid: int = 64
    bootstrap_reps: int = 2000
    level: float = 0.95
    direction: tuple = (1, 0)
    n_max: int = 10
    p_list: tuple = ()
    threshold: int = 300
    max_active: int = 10**6
    out: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"experiment kind must be one of {KINDS}")
        if self.replicas < 1:
            raise ConfigError("replicas must be >= 1")
        if not self.horizons or min(self.horizons) < 1:
            raise ConfigError("need at least one positive horizon")
        if not self.rules:
            raise ConfigError("need at least one rule")
        if self.kind in ("compare", "shape") and len(self.rules) != 2:
            raise ConfigError(f"{self.kind} experiments need exactly two rules")
        if self.kind == "death" and not self.p_list:
            raise ConfigError("death experiments need p_list")
        if any(not 0 < p <= 1 for p in self.p_list):
            raise ConfigError("survival probabilities must lie in (0, 1]")
        if not 0 < self.level < 1:
            raise ConfigError("level must lie in (0, 1)")
        OrderKind(self.order_kind)
        # fail early on unparsable pieces
        self.graph_kind()
        self.rule_objects()
        if self.kind != "death":
            self.walker_object()

    # parsed views
    def graph_kind(self) -> GraphKind:
        return GraphKind.parse(self.graph)

    def rule_objects(self) -> list:
        return [parse_rule(r) for r in self.rules]

    def walker_object(self):
        return parse_walker(self.walker)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["rules"] = list(self.rules)
        d["horizons"] = list(self.horizons)
        d["direction"] = list(self.direction)
        d["p_list"] = list(self.p_list)
        return d

    def digest(self) -> str:
        """Hash of every field except the output path; key order does not matter."""
        d = self.to_dict()
        d.pop("out")
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return replace(self, seed=seed)

    @classmethod
    def parse(cls, text: str) -> "ExperimentConfig":
        cp = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"bad config file: {exc}") from None
        known = {
            "experiment": {"name", "kind", "seed"},
            "model": {"graph", "walker", "rules", "horizons", "replicas", "max_active"},
            "order": {"kind", "t_grid", "bootstrap_reps", "level"},
            "shape": {"direction", "n_max"},
            "death": {"p_list", "threshold"},
            "output": {"path"},
        }
        for sec in cp.sections():
            if sec not in known:
                raise ConfigError(f"unknown section [{sec}]")
            bad = set(cp[sec]) - known[sec]
            if bad:
                raise ConfigError(f"unknown keys in [{sec}]: {sorted(bad)}")

        def get(sec, key, conv=str, default=None):
            if cp.has_option(sec, key):
                try:
                    return conv(cp.get(sec, key))
                except ValueError as exc:
                    raise ConfigError(f"[{sec}] {key}: {exc}") from None
            if default is None:
                raise ConfigError(f"missing [{sec}] {key}")
            return default

        kw = dict(
            name=get("experiment", "name"),
            kind=get("experiment", "kind"),
            seed=get("experiment", "seed", int, 0),
            graph=get("model", "graph"),
            walker=get("model", "walker", str, "srw"),
            rules=tuple(r.strip() for r in get("model", "rules").split(";") if r.strip()),
            horizons=get("model", "horizons", _ints),
            replicas=get("model", "replicas", int),
            max_active=get("model", "max_active", int, 10**6),
            order_kind=get("order", "kind", str, "pgf"),
            t_grid=get("order", "t_grid", int, 64),
            bootstrap_reps=get("order", "bootstrap_reps", int, 2000),
            level=get("order", "level", float, 0.95),
            direction=get("shape", "direction", _ints, (1, 0)),
            n_max=get("shape", "n_max", int, 10),
            p_list=get("death", "p_list", _floats, ()),
            threshold=get("death", "threshold", int, 300),
            out=get("output", "path", str, ""),
        )
        return cls(**kw)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.parse(Path(path).read_text())
