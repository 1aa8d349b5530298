"""
Scenarios
YAML scenario files: parsing, per-task validation and builders for the
fields, gauges, regions and condensers they name
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import yaml

from ringbound.core.base import PROFILES, ToleranceProfile, resolve_profile
from ringbound.exceptions import ValidationError
from ringbound.models.fields import (
    ConstantField,
    LogPowerField,
    MassBudget,
    RadialPowerField,
    ScalarField,
)
from ringbound.models.gauges import (
    ExponentialGauge,
    OrliczGauge,
    PowerExponentialGauge,
    PowerGauge,
    TabulatedGauge,
)
from ringbound.models.geometry import (
    Annulus,
    Ball,
    Box,
    Condenser,
    Exponents,
    Region,
    RingCondenser,
    Segment,
    as_point,
    ring_condenser_sets,
)
from ringbound.utils.grid_io import load_grid_field

logger = logging.getLogger(__name__)

TASKS = (
    "mass-check",
    "ring-bound",
    "fubini",
    "orlicz-curve",
    "epsilon-star",
    "capacity-oracle",
    "certificate-thm1",
    "certificate-thm2",
    "soundness-sweep",
)

# Top-level keys each task cannot do without
REQUIRED: Dict[str, List[str]] = {
    "mass-check": ["field", "gauge", "domain", "M0"],
    "ring-bound": ["exponents", "geometry", "field"],
    "fubini": ["exponents", "geometry", "field"],
    "orlicz-curve": ["exponents", "geometry", "gauge", "M0", "sigma"],
    "epsilon-star": ["exponents", "geometry", "gauge", "M0", "sigma"],
    "capacity-oracle": ["exponents", "resolution"],
    "certificate-thm1": ["exponents", "geometry", "gauge", "M0"],
    "certificate-thm2": ["exponents", "geometry", "gauge", "M0", "b_n"],
    "soundness-sweep": ["exponents", "geometry", "gauge", "alphas", "b_n"],
}

KNOWN_KEYS = {
    "task", "seed", "profile", "tolerances", "exponents", "geometry", "field", "gauge",
    "domain", "M0", "sigma", "b_n", "grid", "condenser", "resolution", "rasterization",
    "allow_conditional", "phi_floor", "alphas", "delta_table", "calibration", "output",
    "radial_samples", "export",
}

FIELD_KINDS = ("constant", "radial-power", "log-power", "grid")
GAUGE_KINDS = ("exponential", "power-exponential", "power", "tabulated")
REGION_KINDS = ("ball", "annulus", "box", "segment")


def _mapping(value: Any, name: str) -> Dict[str, Any]:
    if not isinstance(value, dict):
        raise ValidationError(f"{name} must be a mapping, got {type(value).__name__}")
    return value


def _number(value: Any, name: str) -> float:
    if isinstance(value, bool):
        raise ValidationError(f"{name} must be a number, got {value!r}")
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{name} must be a number, got {value!r}") from None


def _require(spec: Dict[str, Any], key: str, name: str) -> Any:
    if key not in spec:
        raise ValidationError(f"{name}.{key} is required")
    return spec[key]


def build_region(spec: Dict[str, Any], name: str = "region") -> Region:
    """
    Build a ball, annulus, box or segment from its scenario mapping.

    Raises:
        ValidationError: If the kind is unknown or a parameter is invalid
    """
    spec = _mapping(spec, name)
    kind = spec.get("kind")
    if kind not in REGION_KINDS:
        raise ValidationError(f"{name}.kind must be one of {list(REGION_KINDS)}, got {kind!r}")
    if kind == "ball":
        return Ball(
            as_point(_require(spec, "center", name), f"{name}.center"),
            _number(_require(spec, "radius", name), f"{name}.radius"),
        )
    if kind == "annulus":
        return Annulus(
            as_point(_require(spec, "center", name), f"{name}.center"),
            _number(_require(spec, "inner", name), f"{name}.inner"),
            _number(_require(spec, "outer", name), f"{name}.outer"),
        )
    if kind == "box":
        return Box(
            as_point(_require(spec, "lower", name), f"{name}.lower"),
            as_point(_require(spec, "upper", name), f"{name}.upper"),
        )
    return Segment(
        as_point(_require(spec, "start", name), f"{name}.start"),
        as_point(_require(spec, "end", name), f"{name}.end"),
    )


def build_field(spec: Dict[str, Any], base_dir: Path, dimension: int) -> ScalarField:
    """Build a catalog or grid field; ``center`` defaults to the origin."""
    spec = _mapping(spec, "field")
    kind = spec.get("kind")
    if kind not in FIELD_KINDS:
        raise ValidationError(f"field.kind must be one of {list(FIELD_KINDS)}, got {kind!r}")
    support = build_region(spec["support"], "field.support") if "support" in spec else None
    center = as_point(spec.get("center", [0.0] * dimension), "field.center")
    if kind == "constant":
        return ConstantField(_number(_require(spec, "value", "field"), "field.value"), support)
    if kind == "radial-power":
        clamp = _number(spec.get("clamp", math.inf), "field.clamp")
        exponent = _number(_require(spec, "exponent", "field"), "field.exponent")
        return RadialPowerField(exponent, center, clamp, support)
    if kind == "log-power":
        power = _number(_require(spec, "power", "field"), "field.power")
        return LogPowerField(power, center, support)
    path = Path(str(_require(spec, "path", "field")))
    if not path.is_absolute():
        path = base_dir / path
    default = spec.get("default")
    return load_grid_field(
        path,
        default=None if default is None else _number(default, "field.default"),
        support=support,
    )


def build_gauge(spec: Dict[str, Any]) -> OrliczGauge:
    """
    Build a gauge. Tabulated gauges take explicit ``t``/``values`` lists or a
    ``sample`` mapping naming a catalog gauge with ``t_max`` and ``count``.
    """
    spec = _mapping(spec, "gauge")
    kind = spec.get("kind")
    if kind not in GAUGE_KINDS:
        raise ValidationError(f"gauge.kind must be one of {list(GAUGE_KINDS)}, got {kind!r}")
    if kind == "exponential":
        return ExponentialGauge()
    if kind == "power-exponential":
        return PowerExponentialGauge(_number(_require(spec, "beta", "gauge"), "gauge.beta"))
    if kind == "power":
        return PowerGauge(_number(_require(spec, "alpha", "gauge"), "gauge.alpha"))
    if "sample" in spec:
        source = build_gauge(spec["sample"])
        if isinstance(source, TabulatedGauge):
            raise ValidationError("gauge.sample must name a catalog gauge")
        return TabulatedGauge.sample(
            source,
            _number(_require(spec, "t_max", "gauge"), "gauge.t_max"),
            int(spec.get("count", 10001)),
        )
    return TabulatedGauge(
        t=np.asarray(_require(spec, "t", "gauge"), dtype=float),
        values=np.asarray(_require(spec, "values", "gauge"), dtype=float),
    )


@dataclass
class Scenario:
    """
    One parsed scenario file.

    ``data`` keeps the raw mapping (echoed into the run manifest); the
    builder methods turn its sections into validated domain objects.
    """

    task: str
    data: Dict[str, Any]
    source: Path
    seed: int = 0
    profile: ToleranceProfile = field(default_factory=lambda: PROFILES["default"])

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Scenario":
        """
        Read and validate a scenario file.

        Raises:
            ValidationError: If the YAML is malformed or the scenario invalid
            OSError: If the file cannot be read
        """
        path = Path(path)
        text = path.read_text(encoding="utf-8")
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ValidationError(f"malformed YAML in {path}: {exc}") from exc
        return cls.from_dict(_mapping(data, "scenario"), path)

    @classmethod
    def from_dict(cls, data: Dict[str, Any], source: Union[str, Path] = "<memory>") -> "Scenario":
        task = data.get("task")
        if task not in TASKS:
            raise ValidationError(f"task must be one of {list(TASKS)}, got {task!r}")
        unknown = sorted(set(data) - KNOWN_KEYS)
        if unknown:
            raise ValidationError(f"unknown scenario key(s) {unknown}")
        profile = resolve_profile(data.get("profile"))
        profile = profile.with_overrides(data.get("tolerances"))
        seed = data.get("seed", 0)
        if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
            raise ValidationError(f"seed must be a nonnegative integer, got {seed!r}")
        scenario = cls(task=task, data=data, source=Path(source), seed=seed, profile=profile)
        scenario.validate()
        return scenario

    @property
    def base_dir(self) -> Path:
        return self.source.parent

    def validate(self) -> None:
        """Check required keys and build every object the task uses."""
        missing = [key for key in REQUIRED[self.task] if key not in self.data]
        if missing:
            raise ValidationError(f"task {self.task} requires {missing}")
        builders = {
            "exponents": self.exponents,
            "field": self.field,
            "gauge": self.gauge,
            "domain": self.domain,
            "M0": self.budget,
            "sigma": self.sigmas,
            "b_n": self.b_n_spec,
            "alphas": self.alphas,
            "grid": self.eps_grid,
            "delta_table": self.delta_table,
        }
        for key, build in builders.items():
            if key in self.data:
                build()
        self.flag("allow_conditional")
        self.flag("phi_floor")
        self.export_format()
        self.radial_samples()
        if self.task in ("ring-bound", "fubini"):
            self.ring()
        if self.task in ("orlicz-curve", "epsilon-star", "certificate-thm1", "certificate-thm2",
                         "soundness-sweep"):
            self.x0()
            self.r0()
        if self.task == "capacity-oracle":
            self.condenser()
            self.rasterization()
            self.resolution()
        if self.task == "certificate-thm1" and not self.exponents().is_conformal:
            raise ValidationError("certificate-thm1 requires p = n")
        if self.task in ("certificate-thm2", "soundness-sweep"):
            self.exponents().require_between()
        logger.debug("scenario %s validated (task %s)", self.source, self.task)

    def dimension(self) -> int:
        if "exponents" in self.data:
            return self.exponents().n
        return self.domain().dimension

    def exponents(self) -> Exponents:
        spec = _mapping(self.data["exponents"], "exponents")
        n = _require(spec, "n", "exponents")
        if isinstance(n, bool) or not isinstance(n, int):
            raise ValidationError(f"exponents.n must be an integer, got {n!r}")
        return Exponents(n, _number(_require(spec, "p", "exponents"), "exponents.p"))

    def geometry(self) -> Dict[str, Any]:
        return _mapping(self.data.get("geometry", {}), "geometry")

    def x0(self) -> tuple:
        n = self.dimension()
        point = as_point(self.geometry().get("x0", [0.0] * n), "geometry.x0")
        if len(point) != n:
            raise ValidationError(f"geometry.x0 must have {n} coordinates")
        return point

    def r0(self) -> float:
        r0 = _number(_require(self.geometry(), "r0", "geometry"), "geometry.r0")
        if not r0 > 0:
            raise ValidationError(f"geometry.r0 must be positive, got {r0}")
        return r0

    def ring(self) -> RingCondenser:
        geo = self.geometry()
        return RingCondenser(
            self.x0(),
            _number(_require(geo, "r1", "geometry"), "geometry.r1"),
            _number(_require(geo, "r2", "geometry"), "geometry.r2"),
        )

    def field(self) -> ScalarField:
        return build_field(self.data["field"], self.base_dir, self.dimension())

    def gauge(self) -> OrliczGauge:
        return build_gauge(self.data["gauge"])

    def domain(self) -> Region:
        region = build_region(self.data["domain"], "domain")
        if not isinstance(region, (Ball, Annulus, Box)):
            raise ValidationError("domain must be a ball, annulus or box")
        return region

    def budget(self) -> MassBudget:
        return MassBudget(_number(self.data["M0"], "M0"))

    def sigmas(self) -> List[float]:
        raw = self.data["sigma"]
        values = raw if isinstance(raw, list) else [raw]
        out = [_number(v, "sigma") for v in values]
        if not out or any(not s > 0 for s in out):
            raise ValidationError(f"sigma values must be positive, got {raw!r}")
        return out

    def b_n_spec(self) -> Union[float, str]:
        """A positive constant, or ``calibrate`` to fit it with the oracle."""
        raw = self.data["b_n"]
        if raw == "calibrate":
            return raw
        value = _number(raw, "b_n")
        if not value > 0:
            raise ValidationError(f"b_n must be positive or 'calibrate', got {raw!r}")
        return value

    def calibration_resolution(self) -> int:
        spec = _mapping(self.data.get("calibration", {}), "calibration")
        return int(spec.get("resolution", 64))

    def alphas(self) -> List[float]:
        raw = self.data["alphas"]
        if not isinstance(raw, list) or not raw:
            raise ValidationError("alphas must be a nonempty list")
        out = [_number(v, "alphas") for v in raw]
        if any(not a > 1 for a in out):
            raise ValidationError(f"stretch exponents must exceed 1, got {raw!r}")
        return out

    def eps_grid(self) -> Optional[Dict[str, Any]]:
        """Grid overrides: ``decades`` and ``per_decade``, or explicit ``epsilons``."""
        if "grid" not in self.data:
            return None
        spec = _mapping(self.data["grid"], "grid")
        out: Dict[str, Any] = {}
        if "epsilons" in spec:
            eps = [_number(v, "grid.epsilons") for v in spec["epsilons"]]
            if not eps or any(not e > 0 for e in eps):
                raise ValidationError("grid.epsilons must be positive radii")
            if any(b >= a for a, b in zip(eps, eps[1:])):
                raise ValidationError("grid.epsilons must be strictly decreasing")
            out["epsilons"] = eps
        if "decades" in spec:
            out["decades"] = _number(spec["decades"], "grid.decades")
            if not out["decades"] > 0:
                raise ValidationError("grid.decades must be positive")
        if "per_decade" in spec:
            out["per_decade"] = int(spec["per_decade"])
            if out["per_decade"] < 1:
                raise ValidationError("grid.per_decade must be >= 1")
        return out

    def delta_table(self) -> Optional[List[Sequence[float]]]:
        raw = self.data.get("delta_table")
        if raw is None:
            return None
        if not isinstance(raw, list) or any(not isinstance(r, list) or len(r) != 2 for r in raw):
            raise ValidationError("delta_table must be a list of [a, delta] pairs")
        return [(_number(a, "delta_table"), _number(d, "delta_table")) for a, d in raw]

    def condenser(self) -> Condenser:
        """The explicit condenser, or the round ring given by geometry r1/r2."""
        n = self.exponents().n
        if "condenser" in self.data:
            spec = _mapping(self.data["condenser"], "condenser")
            cond = Condenser(
                A=build_region(_require(spec, "A", "condenser"), "condenser.A"),
                C=build_region(_require(spec, "C", "condenser"), "condenser.C"),
            )
        else:
            cond = ring_condenser_sets(self.ring())
        if cond.dimension != n:
            raise ValidationError(f"condenser lives in R^{cond.dimension}, exponents say n = {n}")
        return cond

    def resolution(self) -> int:
        raw = self.data.get("resolution", 128)
        if isinstance(raw, bool) or not isinstance(raw, int) or raw < 32:
            raise ValidationError(f"resolution must be an integer >= 32, got {raw!r}")
        return raw

    def rasterization(self) -> str:
        mode = self.data.get("rasterization", "enclosing")
        if mode not in ("node", "enclosing"):
            raise ValidationError(
                f"rasterization must be one of ['enclosing', 'node'], got {mode!r}"
            )
        return mode

    def flag(self, key: str) -> bool:
        value = self.data.get(key, False)
        if not isinstance(value, bool):
            raise ValidationError(f"{key} must be true or false, got {value!r}")
        return value

    def radial_samples(self) -> int:
        raw = self.data.get("radial_samples", 200)
        if isinstance(raw, bool) or not isinstance(raw, int) or raw < 2:
            raise ValidationError(f"radial_samples must be an integer >= 2, got {raw!r}")
        return raw

    def export_format(self) -> Optional[str]:
        fmt = self.data.get("export")
        if fmt not in (None, "text", "binary"):
            raise ValidationError(f"export must be 'text' or 'binary', got {fmt!r}")
        return fmt

    def output_dir(self, override: Optional[Union[str, Path]] = None) -> Path:
        if override is not None:
            return Path(override)
        spec = _mapping(self.data.get("output", {}), "output")
        target = Path(str(spec.get("dir", f"out/{self.source.stem}")))
        return target if target.is_absolute() else self.base_dir / target
