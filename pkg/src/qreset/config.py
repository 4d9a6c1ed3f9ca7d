"""Run configuration: a YAML file merged with command-line overrides.

Example file::

    model: two_qubit_cavity
    params: {lambda: 1.4, kappa: 3.8}
    approach: steady
    threshold: 0.98
    axes: ["lambda:0.25:8:40", "kappa:0.25:20:40"]
    refine: 2
    coupling_freq: 10MHz
"""
from __future__ import annotations

import math
import numbers
from dataclasses import asdict, dataclass, field

import yaml

from .engine import DEFAULT_ATOL, DEFAULT_RTOL, DEFAULT_SAMPLE_DT
from .io import parse_frequency_hz
from .metrics import DEFAULT_HORIZON, DEFAULT_THRESHOLD, STEADY
from .sweep import INTEGER_PARAMS, MODEL_PARAMS, Axis
from .validation import ConfigError, check_approach, check_model

KEYS = ("model", "params", "approach", "threshold", "horizon", "axes", "refine",
        "coupling_freq", "workers", "out", "sample_dt", "atol", "rtol")


@dataclass(frozen=True)
class RunConfig:
    model: str = "two_qubit"
    params: dict = field(default_factory=dict)
    approach: str = STEADY
    threshold: float = DEFAULT_THRESHOLD
    horizon: float = DEFAULT_HORIZON
    axes: tuple[str, ...] = ()
    refine: int = 0
    coupling_freq: str | None = None
    workers: int = 1
    out: str = "out"
    sample_dt: float = DEFAULT_SAMPLE_DT
    atol: float = DEFAULT_ATOL
    rtol: float = DEFAULT_RTOL

    def to_dict(self) -> dict:
        d = asdict(self)
        d["axes"] = list(self.axes)
        d["params"] = dict(self.params)
        return d

    @property
    def coupling_hz(self) -> float | None:
        return None if self.coupling_freq is None else parse_frequency_hz(self.coupling_freq)

    def parsed_axes(self) -> list[Axis]:
        return [Axis.parse(a) for a in self.axes]


def _real(name, value, *, positive=False, unit_interval=False) -> float:
    if isinstance(value, bool) or not isinstance(value, numbers.Real) or not math.isfinite(value):
        raise ConfigError(f"expected a finite number, got {value!r}", name)
    value = float(value)
    if positive and value <= 0:
        raise ConfigError(f"must be > 0, got {value}", name)
    if unit_interval and not 0 < value < 1:
        raise ConfigError(f"must lie in (0, 1), got {value}", name)
    return value


def _integer(name, value, minimum) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ConfigError(f"expected an integer, got {value!r}", name)
    if value < minimum:
        raise ConfigError(f"must be >= {minimum}, got {value}", name)
    return int(value)


def validate(raw: dict, lines: dict | None = None) -> RunConfig:
    """Check a plain mapping and build a :class:`RunConfig`.

    ``lines`` maps dotted field names to source line numbers for diagnostics.
    """
    lines = lines or {}
    try:
        return _validate(raw)
    except ConfigError as exc:
        if exc.line is None and exc.field is not None:
            line = lines.get(exc.field, lines.get(exc.field.split(".")[0]))
            raise ConfigError(exc.message, exc.field, line) from None
        raise


def _validate(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("top level must be a mapping")
    unknown = sorted(set(raw) - set(KEYS))
    if unknown:
        raise ConfigError(f"unknown key; expected one of {list(KEYS)}", unknown[0])
    out = dict(raw)
    try:
        model = check_model(out.get("model", RunConfig.model))
    except ValueError as exc:
        raise ConfigError(str(exc), "model") from None
    params = out.get("params") or {}
    if not isinstance(params, dict):
        raise ConfigError("expected a mapping of parameter names to values", "params")
    clean = {}
    for k, v in params.items():
        if k not in MODEL_PARAMS[model]:
            raise ConfigError(f"not a parameter of model {model!r}; expected one of "
                              f"{list(MODEL_PARAMS[model])}", f"params.{k}")
        if v is None:
            continue
        clean[k] = _integer(f"params.{k}", v, -1 if k == "alpha_sign" else 1) \
            if k in INTEGER_PARAMS else _real(f"params.{k}", v)
    if "alpha_sign" in clean and clean["alpha_sign"] not in (-1, 1):
        raise ConfigError("must be +1 or -1", "params.alpha_sign")
    out["model"], out["params"] = model, clean
    try:
        out["approach"] = check_approach(out.get("approach", STEADY))
    except ValueError as exc:
        raise ConfigError(str(exc), "approach") from None
    out["threshold"] = _real("threshold", out.get("threshold", DEFAULT_THRESHOLD), unit_interval=True)
    out["horizon"] = _real("horizon", out.get("horizon", DEFAULT_HORIZON), positive=True)
    for k, default in (("sample_dt", DEFAULT_SAMPLE_DT), ("atol", DEFAULT_ATOL), ("rtol", DEFAULT_RTOL)):
        out[k] = _real(k, out.get(k, default), positive=True)
    axes = out.get("axes") or []
    if isinstance(axes, str) or not isinstance(axes, list) or len(axes) > 2:
        raise ConfigError("expected a list of at most two 'name:lo:hi:count' strings", "axes")
    for i, a in enumerate(axes):
        try:
            ax = Axis.parse(str(a))
        except ValueError as exc:
            raise ConfigError(str(exc), f"axes[{i}]") from None
        if ax.name not in MODEL_PARAMS[model]:
            raise ConfigError(f"{ax.name!r} is not a parameter of model {model!r}", f"axes[{i}]")
    if len(axes) == 2 and Axis.parse(axes[0]).name == Axis.parse(axes[1]).name:
        raise ConfigError("the two axes sweep the same parameter", "axes")
    out["axes"] = tuple(str(a) for a in axes)
    out["refine"] = _integer("refine", out.get("refine", 0), 0)
    out["workers"] = _integer("workers", out.get("workers", 1), 1)
    cf = out.get("coupling_freq")
    if cf is not None:
        try:
            hz = parse_frequency_hz(cf)
        except ValueError as exc:
            raise ConfigError(str(exc), "coupling_freq") from None
        if not hz > 0:
            raise ConfigError("must be > 0", "coupling_freq")
        out["coupling_freq"] = str(cf)
    out["out"] = str(out.get("out", RunConfig.out))
    return RunConfig(**out)


def _line_index(node, prefix="", acc=None) -> dict:
    # 1-based source line of every mapping key, dotted for nested mappings
    acc = {} if acc is None else acc
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            name = f"{prefix}{k.value}"
            acc[name] = k.start_mark.line + 1
            _line_index(v, name + ".", acc)
    elif isinstance(node, yaml.SequenceNode):
        base = prefix[:-1]
        for i, v in enumerate(node.value):
            acc[f"{base}[{i}]"] = v.start_mark.line + 1
    return acc


def load_config(path, overrides: dict | None = None) -> RunConfig:
    """Read a YAML config file, apply ``overrides`` (flags win) and validate.

    Overrides may contain a nested ``params`` mapping that is merged key by key.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    try:
        raw = yaml.safe_load(text)
        lines = _line_index(yaml.compose(text)) if raw is not None else {}
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"YAML syntax error: {getattr(exc, 'problem', exc)}",
                          line=mark.line + 1 if mark else None) from None
    raw = {} if raw is None else raw
    if not isinstance(raw, dict):
        raise ConfigError("top level must be a mapping", line=1)
    overrides = overrides or {}
    # values supplied as flags have no source line
    flagged = {f"params.{k}" for k in overrides.get("params", {})} | (set(overrides) - {"params"})
    lines = {k: v for k, v in lines.items() if k.split("[")[0] not in flagged}
    return validate(merge(raw, overrides), lines)


def merge(base: dict, overrides: dict) -> dict:
    merged = dict(base)
    for k, v in overrides.items():
        if k == "params":
            merged["params"] = {**(merged.get("params") or {}), **v}
        else:
            merged[k] = v
    return merged


def dump_config(cfg: RunConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=True)


__all__ = ["RunConfig", "ConfigError", "load_config", "validate", "merge", "dump_config"]
