"""Builtin chart metrics and user-supplied metric configurations."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dsl import MetricSpec
from .errors import ConfigError, ParseError

VALIDATION_POINTS = 5


@dataclass(frozen=True)
class Box:
    re: tuple[float, float]
    im: tuple[float, float]

    def contains(self, z: complex) -> bool:
        return self.re[0] <= z.real <= self.re[1] and self.im[0] <= z.imag <= self.im[1]


@dataclass(frozen=True, eq=False)
class CatalogEntry:
    spec: MetricSpec
    sample_region: tuple[Box, ...]
    expected_properties: dict = field(default_factory=dict)

    @property
    def name(self) -> str:
        return self.spec.name

    @property
    def n(self) -> int:
        return self.spec.n

    def contains(self, z) -> bool:
        return all(box.contains(complex(c)) for box, c in zip(self.sample_region, z))


def _sum_s(n):
    return " + ".join(f"z{k}*w{k}" for k in range(1, n + 1))


def _flat(n=3):
    return [["1" if i == j else "0" for j in range(n)] for i in range(n)]


def _fubini_study(n=3):
    s = f"(1 + {_sum_s(n)})"
    rows = []
    for i in range(1, n + 1):
        row = []
        for j in range(1, n + 1):
            tail = f"w{i}*z{j}/{s}^2"
            row.append(f"1/{s} - {tail}" if i == j else f"-{tail}")
        rows.append(row)
    return rows


def _hopf(n=3):
    s = f"({_sum_s(n)})"
    return [[f"1/{s}" if i == j else "0" for j in range(n)] for i in range(n)]


# from the left-invariant coframe dz1, dz2, dz3 - z1 dz2
_IWASAWA = [
    ["1", "0", "0"],
    ["0", "1 + z1*w1", "-z1"],
    ["0", "-w1", "1"],
]

_UNIT_BOX = Box((-1.0, 1.0), (-1.0, 1.0))
_HOPF_BOXES = (Box((0.5, 1.4), (-1.4, 1.4)), Box((-1.4, 1.4), (-1.4, 1.4)), Box((-1.4, 1.4), (-1.4, 1.4)))

_BUILTINS = {
    "flat3": (
        _flat,
        (_UNIT_BOX,) * 3,
        {"kahler": True, "balanced": True, "chern_flat": True, "constant_hsc": 0.0},
    ),
    "fubini_study3": (
        _fubini_study,
        (_UNIT_BOX,) * 3,
        {"kahler": True, "balanced": True, "chern_flat": False, "constant_hsc": 2.0},
    ),
    "iwasawa": (
        lambda: _IWASAWA,
        (_UNIT_BOX,) * 3,
        {"kahler": False, "balanced": True, "chern_flat": True, "constant_hsc": 0.0},
    ),
    "hopf3": (
        _hopf,
        _HOPF_BOXES,
        {"kahler": False, "balanced": False, "chern_flat": False, "constant_hsc": None},
    ),
}

BUILTIN_NAMES = tuple(_BUILTINS)


def load_builtin(name: str) -> CatalogEntry:
    if name not in _BUILTINS:
        raise KeyError(f"unknown manifold {name!r}; builtins are {', '.join(BUILTIN_NAMES)}")
    rows, region, props = _BUILTINS[name]
    return CatalogEntry(MetricSpec.from_strings(name, rows()), region, dict(props))


def sample_points(entry: CatalogEntry, count: int, seed: int = 0) -> list[np.ndarray]:
    """Deterministic points in the sample region; point ``k`` depends only on ``(seed, k)``."""
    if count < 1:
        raise ValueError("count must be at least 1")
    if seed < 0:
        raise ValueError("seed must be nonnegative")
    lo = np.array([[b.re[0], b.im[0]] for b in entry.sample_region])
    hi = np.array([[b.re[1], b.im[1]] for b in entry.sample_region])
    out = []
    for k in range(count):
        rng = np.random.Generator(np.random.Philox(key=[seed, k]))
        u = rng.random(lo.shape)
        x = lo + (hi - lo) * u
        out.append(x[:, 0] + 1j * x[:, 1])
    return out


def _line_of(text: str, key: str) -> int | None:
    needle = f'"{key}"'
    pos = text.find(needle)
    return None if pos < 0 else text.count("\n", 0, pos) + 1


def load_config(path) -> CatalogEntry:
    """Read a JSON metric configuration and validate it at sample points."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_config(text, source=str(path))


def parse_config(text: str, source: str = "<config>") -> CatalogEntry:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}: invalid JSON: {exc.msg}", line=exc.lineno) from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{source}: top level must be an object", line=1)

    def fail(msg, key):
        raise ConfigError(f"{source}: {msg}", field=key, line=_line_of(text, key))

    for key in ("name", "dimension", "metric", "sample_region"):
        if key not in doc:
            fail("missing required field", key)
    extra = sorted(set(doc) - {"name", "dimension", "metric", "sample_region"})
    if extra:
        fail("unknown field", extra[0])

    name, n, metric, region = doc["name"], doc["dimension"], doc["metric"], doc["sample_region"]
    if not isinstance(name, str) or not name:
        fail("must be a nonempty string", "name")
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        fail("must be a positive integer", "dimension")
    if (
        not isinstance(metric, list)
        or len(metric) != n
        or any(not isinstance(row, list) or len(row) != n for row in metric)
    ):
        fail(f"must be a {n}x{n} array of strings", "metric")
    if any(not isinstance(e, str) for row in metric for e in row):
        fail("entries must be strings", "metric")
    if not isinstance(region, list) or len(region) != n:
        fail(f"must list {n} boxes", "sample_region")
    boxes = []
    for k, box in enumerate(region):
        if not isinstance(box, dict) or set(box) != {"re", "im"}:
            fail(f"box {k + 1} must have exactly the keys 're' and 'im'", "sample_region")
        bounds = []
        for part in ("re", "im"):
            iv = box[part]
            if (
                not isinstance(iv, list)
                or len(iv) != 2
                or any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in iv)
                or iv[0] > iv[1]
            ):
                fail(f"box {k + 1} '{part}' must be [lo, hi] with lo <= hi", "sample_region")
            bounds.append((float(iv[0]), float(iv[1])))
        boxes.append(Box(*bounds))

    try:
        spec = MetricSpec.from_strings(name, metric)
    except ParseError as exc:
        raise ConfigError(f"{source}: {exc}", field="metric", line=_line_of(text, "metric")) from exc
    entry = CatalogEntry(spec, tuple(boxes), {})
    for z in sample_points(entry, VALIDATION_POINTS, seed=0):
        spec.validate(z)
    return entry


def load(name_or_path: str) -> CatalogEntry:
    """A builtin by name, otherwise a configuration file path."""
    if name_or_path in _BUILTINS:
        return load_builtin(name_or_path)
    if Path(name_or_path).suffix == ".json" or Path(name_or_path).exists():
        return load_config(name_or_path)
    raise KeyError(f"unknown manifold {name_or_path!r}; builtins are {', '.join(BUILTIN_NAMES)}")


__all__ = [
    "BUILTIN_NAMES",
    "Box",
    "CatalogEntry",
    "load",
    "load_builtin",
    "load_config",
    "parse_config",
    "sample_points",
]
