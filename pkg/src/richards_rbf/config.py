"""Scenario configuration: a flat ``key = value`` text format.

Blank lines and ``#`` comments are ignored.  Example::

    dimension = 1
    soil = sandy_clay
    T = 600
    N_z = 201
    n_s = 3
    output_times = 0, 100, 600
"""
import dataclasses
from dataclasses import dataclass, field

from .constitutive import SOILS, SoilParams
from .errors import ConfigurationError

SOIL_KEYS = {"theta_r": "theta_r", "theta_s": "theta_s", "theta_0": "theta_0",
             "K_s": "K_s", "h_cap": "h_cap", "lambda": "lam", "m": "m"}

REQUIRED = ("dimension", "soil", "T")

DEFAULTS = {
    "L": 100.0,
    "l": 100.0,
    "N_z": 201,
    "N_x": 101,
    "dt": 0.05,
    "eps": 0.6,
    "n_s": 5,
    "tol": 1e-8,
    "max_picard": 50,
    "anderson_depth": 5,
    "neumann": "reflect",
    "oracle_N_z": 401,
    "oracle_dt": 0.01,
}

INT_KEYS = {"dimension", "N_z", "N_x", "n_s", "max_picard", "anderson_depth",
            "oracle_N_z"}


@dataclass(frozen=True)
class ScenarioConfig:
    """Complete, validated description of one simulation."""

    dimension: int
    soil: SoilParams
    T: float
    output_times: tuple
    L: float = DEFAULTS["L"]
    l: float = DEFAULTS["l"]
    N_z: int = DEFAULTS["N_z"]
    N_x: int = DEFAULTS["N_x"]
    dt: float = DEFAULTS["dt"]
    eps: float = DEFAULTS["eps"]
    n_s: int = DEFAULTS["n_s"]
    tol: float = DEFAULTS["tol"]
    max_picard: int = DEFAULTS["max_picard"]
    anderson_depth: int = DEFAULTS["anderson_depth"]
    neumann: str = DEFAULTS["neumann"]
    oracle_N_z: int = DEFAULTS["oracle_N_z"]
    oracle_dt: float = DEFAULTS["oracle_dt"]
    defaulted: tuple = field(default=(), compare=False)

    def __post_init__(self):
        validate(self)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def metadata(self):
        """``(key, value, source)`` rows describing every parameter."""
        rows = []
        for f in dataclasses.fields(self):
            if f.name in ("soil", "defaulted"):
                continue
            value = getattr(self, f.name)
            if f.name == "output_times":
                value = " ".join(repr(float(t)) for t in value)
            src = "default" if f.name in self.defaulted else "config"
            rows.append((f.name, value, src))
        rows.append(("soil", self.soil.name, "config"))
        for key, attr in SOIL_KEYS.items():
            src = "default" if key in self.defaulted else "config"
            rows.append((key, getattr(self.soil, attr), src))
        return rows


def _fail(key, message):
    raise ConfigurationError(f"{key}: {message}")


def validate(c):
    if c.dimension not in (1, 2):
        _fail("dimension", f"must be 1 or 2 (got {c.dimension})")
    for key in ("L", "l", "dt", "eps", "tol", "oracle_dt"):
        v = getattr(c, key)
        if not v > 0:
            _fail(key, f"must be positive (got {v})")
    if not c.T >= 0:
        _fail("T", f"must be non-negative (got {c.T})")
    for key in ("N_z", "N_x", "oracle_N_z"):
        if getattr(c, key) < 3:
            _fail(key, f"must be at least 3 (got {getattr(c, key)})")
    n_nodes = c.N_z if c.dimension == 1 else c.N_z * c.N_x
    if not 2 <= c.n_s <= n_nodes:
        _fail("n_s", f"must lie in [2, {n_nodes}] (got {c.n_s})")
    if c.max_picard < 1:
        _fail("max_picard", "must be at least 1")
    if c.anderson_depth < 0:
        _fail("anderson_depth", "must be non-negative")
    if c.neumann not in ("reflect", "collocate"):
        _fail("neumann", f"must be 'reflect' or 'collocate' (got {c.neumann!r})")
    ts = list(c.output_times)
    if not ts:
        _fail("output_times", "must not be empty")
    if ts != sorted(ts) or len(set(ts)) != len(ts):
        _fail("output_times", "must be strictly increasing")
    if ts[0] < 0 or ts[-1] > c.T:
        _fail("output_times", f"must lie in [0, T={c.T}]")
    for key, t in [("T", c.T)] + [("output_times", t) for t in ts]:
        k = round(t / c.dt)
        if abs(k * c.dt - t) > 1e-9 * max(1.0, t):
            _fail(key, f"{t} is not a multiple of dt={c.dt}")


def _convert(key, raw):
    if key in ("soil", "neumann"):
        return raw
    if key == "output_times":
        try:
            return tuple(float(v) for v in raw.replace(",", " ").split())
        except ValueError:
            _fail(key, f"cannot parse {raw!r} as a list of numbers")
    try:
        if key in INT_KEYS:
            v = float(raw)
            if v != int(v):
                raise ValueError
            return int(v)
        return float(raw)
    except ValueError:
        _fail(key, f"cannot parse {raw!r} as a number")


def parse_config(text):
    """Parse a configuration document into a :class:`ScenarioConfig`."""
    known = set(REQUIRED) | set(DEFAULTS) | set(SOIL_KEYS) | {"output_times"}
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected 'key = value'")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in known:
            _fail(key, "unknown key")
        if key in values:
            _fail(key, "given more than once")
        values[key] = _convert(key, raw)
    for key in REQUIRED:
        if key not in values:
            _fail(key, "required key is missing")

    defaulted = [k for k in DEFAULTS if k not in values]
    params = {k: values.get(k, v) for k, v in DEFAULTS.items()}

    name = values["soil"]
    if name == "custom":
        missing = [k for k in SOIL_KEYS if k not in values]
        if missing:
            _fail(missing[0], "required for soil = custom")
        soil = SoilParams(name="custom",
                          **{a: values[k] for k, a in SOIL_KEYS.items()})
    elif name in SOILS:
        base = SOILS[name]
        overrides = {a: values[k] for k, a in SOIL_KEYS.items() if k in values}
        defaulted += [k for k in SOIL_KEYS if k not in values]
        soil = dataclasses.replace(base, **overrides) if overrides else base
    else:
        _fail("soil", f"unknown soil {name!r}; use one of {sorted(SOILS)} or custom")

    T = values["T"]
    if "output_times" in values:
        times = values["output_times"]
    else:
        times = (0.0, T) if T > 0 else (0.0,)
        defaulted.append("output_times")
    return ScenarioConfig(dimension=values["dimension"], soil=soil, T=T,
                          output_times=tuple(times), defaulted=tuple(defaulted),
                          **params)


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
