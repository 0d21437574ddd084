"""Pipeline configuration: one YAML file, full defaulting, dotted overrides.

Every subcommand reads the same document; unknown keys are rejected so a
typo cannot silently fall back to a default.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields
from pathlib import Path

import yaml

from .augment import AugmentPolicy
from .core import Alphabet, alphabet_default
from .errors import ConfigError
from .metrics import Normalizer
from .recognize import Backend, PrototypeBackend, RecordedBackend
from .router import Route, RouterConfig
from .synthgen import SynthConfig

_TOP_KEYS = {"seed", "alphabet", "normalizer", "router", "augment", "synth", "backends"}


@dataclass(frozen=True)
class BackendSpec:
    name: str
    type: str
    routes: frozenset
    params: tuple

    @property
    def params_dict(self) -> dict:
        return dict(self.params)


@dataclass(frozen=True)
class PipelineConfig:
    seed: int = 0
    alphabet: Alphabet = field(default_factory=alphabet_default)
    normalizer: Normalizer = field(default_factory=Normalizer)
    router: RouterConfig = field(default_factory=RouterConfig)
    augment: AugmentPolicy = field(default_factory=AugmentPolicy)
    synth: SynthConfig | None = None
    backends: tuple = ()


_DEFAULT_BACKENDS = (
    {"name": "baseline", "type": "prototype", "routes": ["Baseline"]},
    {"name": "long", "type": "prototype", "routes": ["Long"]},
    {"name": "vertical", "type": "prototype", "routes": ["Vertical"],
     "flip_search": True},
)


def _require_mapping(value, what: str) -> dict:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"{what} must be a mapping, got {type(value).__name__}")
    return dict(value)


def _build_dataclass(cls, mapping: dict, what: str):
    known = {f.name for f in fields(cls)}
    kwargs = {}
    for key, value in mapping.items():
        if key not in known:
            raise ConfigError(f"unknown {what} option {key!r}")
        if isinstance(value, list):
            value = tuple(value)
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"bad {what} options: {exc}") from None


def _parse_routes(raw, what: str) -> frozenset:
    if not isinstance(raw, list) or not raw:
        raise ConfigError(f"{what}: routes must be a non-empty list")
    routes = set()
    valid = {r.value: r for r in Route}
    for item in raw:
        if item not in valid:
            raise ConfigError(
                f"{what}: unknown route {item!r} (expected one of {sorted(valid)})"
            )
        routes.add(valid[item])
    return frozenset(routes)


def _parse_backend(raw, index: int) -> BackendSpec:
    entry = _require_mapping(raw, f"backends[{index}]")
    name = entry.pop("name", None)
    btype = entry.pop("type", None)
    if not name or not isinstance(name, str):
        raise ConfigError(f"backends[{index}]: missing name")
    if btype not in ("prototype", "recorded"):
        raise ConfigError(f"backend {name!r}: type must be prototype or recorded")
    routes = _parse_routes(entry.pop("routes", None), f"backend {name!r}")
    if btype == "recorded":
        path = entry.pop("path", None)
        if not path:
            raise ConfigError(f"backend {name!r}: recorded backends need a path")
        if not os.path.exists(path):
            raise ConfigError(f"backend {name!r}: recorded file not found: {path}")
        entry["path"] = path
    params = tuple(sorted((k, tuple(v) if isinstance(v, list) else v)
                          for k, v in entry.items()))
    return BackendSpec(name, btype, routes, params)


def _apply_override(tree: dict, spec: str) -> None:
    if "=" not in spec:
        raise ConfigError(f"override must look like key=value, got {spec!r}")
    dotted, raw_value = spec.split("=", 1)
    keys = dotted.split(".")
    if not all(keys):
        raise ConfigError(f"bad override key {dotted!r}")
    try:
        value = yaml.safe_load(raw_value)
    except yaml.YAMLError:
        value = raw_value
    node = tree
    for key in keys[:-1]:
        if isinstance(node, list):
            node = node[_list_index(node, key, dotted)]
        elif isinstance(node, dict):
            node = node.setdefault(key, {})
        else:
            raise ConfigError(f"override {dotted!r}: {key!r} is not a section")
        if not isinstance(node, (dict, list)):
            raise ConfigError(f"override {dotted!r}: {key!r} is not a section")
    leaf = keys[-1]
    if isinstance(node, list):
        node[_list_index(node, leaf, dotted)] = value
    else:
        node[leaf] = value


def _list_index(node: list, key: str, dotted: str) -> int:
    try:
        index = int(key)
    except ValueError:
        raise ConfigError(f"override {dotted!r}: list index expected, got {key!r}") from None
    if not 0 <= index < len(node):
        raise ConfigError(f"override {dotted!r}: index {index} out of range")
    return index


def load_config(path=None, overrides=(), seed_override: int | None = None) -> PipelineConfig:
    """Parse the YAML config, apply --set overrides, build typed sections."""
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        try:
            tree = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: invalid YAML: {exc}") from None
        tree = _require_mapping(tree, "config")
    else:
        tree = {}

    for spec in overrides:
        _apply_override(tree, spec)

    unknown = set(tree) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")

    seed = tree.get("seed", 0)
    if seed_override is not None:
        seed = seed_override
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigError(f"seed must be an integer, got {seed!r}")

    alphabet_raw = tree.get("alphabet")
    if alphabet_raw is None:
        alphabet = alphabet_default()
    elif isinstance(alphabet_raw, str) and alphabet_raw:
        try:
            alphabet = Alphabet(alphabet_raw)
        except ValueError as exc:
            raise ConfigError(f"bad alphabet: {exc}") from None
    else:
        raise ConfigError("alphabet must be a non-empty string of symbols")

    normalizer = _build_dataclass(
        Normalizer, _require_mapping(tree.get("normalizer"), "normalizer"), "normalizer")
    router = _build_dataclass(
        RouterConfig, _require_mapping(tree.get("router"), "router"), "router")
    augment = AugmentPolicy.from_mapping(
        _require_mapping(tree.get("augment"), "augment"))

    synth = None
    if "synth" in tree and tree["synth"] is not None:
        synth_map = _require_mapping(tree["synth"], "synth")
        bake = synth_map.pop("augment", False)
        if not isinstance(bake, bool):
            raise ConfigError("synth.augment must be true or false")
        # --seed beats even an explicit synth.seed
        if seed_override is not None:
            synth_map["seed"] = seed
        else:
            synth_map.setdefault("seed", seed)
        lexicon_path = synth_map.get("lexicon_path")
        if not lexicon_path:
            raise ConfigError("synth section needs lexicon_path")
        if not os.path.exists(lexicon_path):
            raise ConfigError(f"lexicon file not found: {lexicon_path}")
        synth = _build_dataclass(SynthConfig, synth_map, "synth")
        if bake:
            synth = SynthConfig(**{**_as_kwargs(synth), "augment": augment})

    raw_backends = tree.get("backends", list(_DEFAULT_BACKENDS))
    if not isinstance(raw_backends, list) or not raw_backends:
        raise ConfigError("backends must be a non-empty list")
    specs = tuple(_parse_backend(b, i) for i, b in enumerate(raw_backends))
    names = [s.name for s in specs]
    if len(set(names)) != len(names):
        raise ConfigError("backend names must be unique")

    return PipelineConfig(seed=seed, alphabet=alphabet, normalizer=normalizer,
                          router=router, augment=augment, synth=synth,
                          backends=specs)


def _as_kwargs(cfg) -> dict:
    return {f.name: getattr(cfg, f.name) for f in fields(cfg)}


def build_backends(cfg: PipelineConfig) -> dict:
    """Instantiate every declared backend, grouped by route."""
    by_route: dict = {route: [] for route in Route}
    for spec in cfg.backends:
        params = spec.params_dict
        if spec.type == "prototype":
            try:
                backend: Backend = PrototypeBackend(
                    name=spec.name, alphabet=cfg.alphabet,
                    route_affinity=spec.routes, **params)
            except TypeError as exc:
                raise ConfigError(f"backend {spec.name!r}: {exc}") from None
        else:
            path = params.pop("path")
            if params:
                raise ConfigError(
                    f"backend {spec.name!r}: unknown option(s) {sorted(params)}")
            backend = RecordedBackend(spec.name, path, route_affinity=spec.routes)
        for route in spec.routes:
            by_route[route].append(backend)
    return by_route
