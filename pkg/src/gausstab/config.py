"""Flat key-value run configuration with dotted section keys.

Config files look like::

    surface.kind = sphere
    surface.radius = 1.0
    surface.resolution = 5
    eig.count = 9
    tol.zero = 1e-2
    estimates.R = 4.0

Unknown keys are rejected so typos fail loudly. CLI flags override file
values.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields

from .surface import SurfaceSpec


class ConfigError(ValueError):
    pass


_BOOL = {"true": True, "1": True, "yes": True, "false": False, "0": False, "no": False}


def _parse_bool(key, raw):
    try:
        return _BOOL[str(raw).strip().lower()]
    except KeyError:
        raise ConfigError(f"{key}: expected a boolean, got {raw!r}") from None


def _parse_num(key, raw, cast):
    try:
        return cast(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected {cast.__name__}, got {raw!r}") from None


@dataclass
class AnalysisConfig:
    """Everything a run needs: surface, weight, solver and check knobs."""

    surface_kind: str = "sphere"
    surface_resolution: int = 5
    surface_dim: int = 2
    surface_radius: float = 1.0
    surface_center: tuple = (0.0, 0.0, 0.0)
    surface_offset: float = 0.0
    surface_trunc: float = 8.0
    surface_half_height: float = 12.0
    surface_minor_radius: float = 0.5
    surface_amplitude: float = 0.5
    surface_extent: float = 4.0

    weight_kind: str = "gaussian"

    eig_count: int = 9
    eig_constrained: bool = True

    tol_zero: float = 1e-2
    tol_cluster: float = 5e-2
    tol_split: float = 1e-6
    tol_simons: float = 0.5

    est_R: float | None = None   # probe/cutoff radius; default max(4, extent/2)
    est_gamma: float = 0.05
    est_M: float = 2.0
    est_s: float = 0.5
    est_t: float = 0.5
    est_lambda: float = 0.0

    check_rel_tol: float = 2e-2
    figures: bool = True

    def validate(self):
        for name in ("tol_zero", "tol_cluster", "tol_split", "tol_simons"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"tol.{name[4:]}: must be > 0")
        if self.eig_count < 1:
            raise ConfigError("eig.count: must be >= 1")
        if self.weight_kind != "gaussian":
            raise ConfigError(
                f"weight.kind: only 'gaussian' is supported in config files, got {self.weight_kind!r}"
            )
        self.surface_spec()  # surfaces validate their own parameters

    def surface_spec(self) -> SurfaceSpec:
        spec = SurfaceSpec(
            kind=self.surface_kind,
            resolution=self.surface_resolution,
            dim=self.surface_dim,
            radius=self.surface_radius,
            center=tuple(self.surface_center),
            offset=self.surface_offset,
            trunc=self.surface_trunc,
            half_height=self.surface_half_height,
            minor_radius=self.surface_minor_radius,
            amplitude=self.surface_amplitude,
            extent=self.surface_extent,
        )
        try:
            spec.validate()
        except ValueError as exc:
            raise ConfigError(f"surface: {exc}") from None
        return spec

    def to_flat_dict(self) -> dict:
        out = {}
        for f in fields(self):
            key = f.name.replace("_", ".", 1)
            val = getattr(self, f.name)
            if isinstance(val, tuple):
                val = list(val)
            out[key] = val
        return out


_KEY_MAP = {
    "surface.kind": ("surface_kind", str),
    "surface.resolution": ("surface_resolution", int),
    "surface.dim": ("surface_dim", int),
    "surface.radius": ("surface_radius", float),
    "surface.center": ("surface_center", "vector"),
    "surface.offset": ("surface_offset", float),
    "surface.trunc": ("surface_trunc", float),
    "surface.half_height": ("surface_half_height", float),
    "surface.minor_radius": ("surface_minor_radius", float),
    "surface.amplitude": ("surface_amplitude", float),
    "surface.extent": ("surface_extent", float),
    "weight.kind": ("weight_kind", str),
    "eig.count": ("eig_count", int),
    "eig.constrained": ("eig_constrained", "bool"),
    "tol.zero": ("tol_zero", float),
    "tol.cluster": ("tol_cluster", float),
    "tol.split": ("tol_split", float),
    "tol.simons": ("tol_simons", float),
    "estimates.R": ("est_R", float),
    "estimates.gamma": ("est_gamma", float),
    "estimates.M": ("est_M", float),
    "estimates.s": ("est_s", float),
    "estimates.t": ("est_t", float),
    "estimates.lambda": ("est_lambda", float),
    "check.rel_tol": ("check_rel_tol", float),
    "output.figures": ("figures", "bool"),
}


def apply_entry(config: AnalysisConfig, key: str, raw: str):
    if key not in _KEY_MAP:
        raise ConfigError(f"unknown config key {key!r}")
    attr, kind = _KEY_MAP[key]
    if kind == "bool":
        setattr(config, attr, _parse_bool(key, raw))
    elif kind == "vector":
        parts = str(raw).replace(",", " ").split()
        setattr(config, attr, tuple(_parse_num(key, p, float) for p in parts))
    elif kind is str:
        setattr(config, attr, str(raw).strip())
    else:
        setattr(config, attr, _parse_num(key, raw, kind))


def load_config(path=None, overrides=None) -> AnalysisConfig:
    """Read a config file (optional) and apply override pairs on top."""
    config = AnalysisConfig()
    if path is not None:
        with open(path) as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
                key, value = (part.strip() for part in line.split("=", 1))
                apply_entry(config, key, value)
    for key, value in overrides or []:
        apply_entry(config, key, value)
    config.validate()
    return config
