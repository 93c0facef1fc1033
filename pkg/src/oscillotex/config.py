"""Configuration parsing: structured text (TOML) with a JSON mirror.

One schema, two encodings. Files ending in .json parse as JSON; anything
else parses as TOML. Every file must carry schema_version = 1 at top
level. Scenario sections provide parameter defaults that command-line
flags override; constitutive definitions (spectra, textures) build
directly into the corresponding domain objects.

The full schema is documented in docs/config.md.
"""

import json
import math

try:
    import tomllib as _toml
except ModuleNotFoundError:  # Python 3.10
    import tomli as _toml

import numpy as np

from .viscosity import (
    ConstantPhase,
    Cosine,
    OneSided,
    PhaseOnly,
    PhaseTexture1D,
    PronySpectrum,
    SmoothDefect,
    SpanwiseTexture,
    TwoLayerPhase,
)

__all__ = [
    "SCHEMA_VERSION",
    "ConfigError",
    "load_config",
    "scenario_defaults",
    "spectrum_from_config",
    "phase_texture_from_config",
    "spanwise_texture_from_config",
]

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Malformed or unsupported configuration."""


def load_config(path):
    """Parse a TOML or JSON configuration file and check its version."""
    path = str(path)
    try:
        if path.endswith(".json"):
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        else:
            with open(path, "rb") as fh:
                data = _toml.load(fh)
    except (json.JSONDecodeError, _toml.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("configuration root must be a table")
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(
            f"schema_version {version!r} unsupported (expected {SCHEMA_VERSION})")
    return data


def scenario_defaults(config, kind):
    """Parameter table for one scenario kind; empty when absent."""
    section = config.get(kind, {})
    if not isinstance(section, dict):
        raise ConfigError(f"section [{kind}] must be a table")
    return dict(section)


def spectrum_from_config(table):
    """PronySpectrum from {"terms": [[weight, rate], ...]}."""
    terms = table.get("terms")
    if not isinstance(terms, list) or not terms:
        raise ConfigError("spectrum needs a nonempty 'terms' list")
    pairs = []
    for entry in terms:
        if not isinstance(entry, (list, tuple)) or len(entry) != 2:
            raise ConfigError("each spectrum term is a [weight, rate] pair")
        pairs.append((float(entry[0]), float(entry[1])))
    return PronySpectrum(terms=tuple(pairs))


def phase_texture_from_config(table):
    """PhaseTexture1D from a profile table.

    Profiles: {"kind": "constant", "phi0": ...},
    {"kind": "twolayer", "phi1": ..., "phi2": ..., "y_c": ...},
    {"kind": "defect", "eps": ..., "chi": [...], "ell": ...}.
    """
    mu0 = float(table.get("mu0", 1.0))
    H = float(table.get("H", 1.0))
    profile = table.get("profile")
    if not isinstance(profile, dict):
        raise ConfigError("texture needs a 'profile' table")
    kind = profile.get("kind")
    if kind == "constant":
        prof = ConstantPhase(phi0=float(profile.get("phi0", 0.0)))
    elif kind == "twolayer":
        prof = TwoLayerPhase(phi1=float(profile["phi1"]),
                             phi2=float(profile["phi2"]),
                             y_c=float(profile["y_c"]))
    elif kind == "defect":
        chi = np.asarray(profile["chi"], dtype=float)
        prof = SmoothDefect(eps=float(profile["eps"]), chi=chi,
                            ell=float(profile["ell"]))
    else:
        raise ConfigError(f"unknown phase profile kind {kind!r}")
    try:
        return PhaseTexture1D(mu0=mu0, H=H, profile=prof)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def spanwise_texture_from_config(table, n_nodes):
    """SpanwiseTexture from a family table plus baseline data.

    The baseline may be a scalar (constant profile, possibly complex via
    a [re, im] pair) or an explicit per-node list; ``n_nodes`` pins the
    sampling length expected by the solver grid.
    """
    fam_table = table.get("family")
    if not isinstance(fam_table, dict):
        raise ConfigError("texture needs a 'family' table")
    kind = str(fam_table.get("kind", "")).lower()
    eps = float(fam_table.get("eps", 0.0))
    m0 = int(fam_table.get("m0", 1))
    if kind == "onesided":
        family = OneSided(eps=eps, m0=m0)
    elif kind == "cosine":
        family = Cosine(eps=eps, m0=m0)
    elif kind == "phaseonly":
        family = PhaseOnly(eps=eps, m0=m0, band=int(fam_table.get("band", 2)))
    else:
        raise ConfigError(f"unknown spanwise family kind {kind!r}")
    raw = table.get("baseline", 1.0)
    if isinstance(raw, (int, float)):
        base = np.full(n_nodes, complex(raw))
    elif (isinstance(raw, (list, tuple)) and len(raw) == 2
          and all(isinstance(v, (int, float)) for v in raw)):
        base = np.full(n_nodes, complex(raw[0], raw[1]))
    elif isinstance(raw, list):
        base = np.asarray([complex(v[0], v[1]) if isinstance(v, (list, tuple))
                           else complex(v) for v in raw])
        if base.size != n_nodes:
            raise ConfigError("baseline sample count must match grid nodes")
    else:
        raise ConfigError("baseline must be scalar, [re, im], or a list")
    L_z = float(table.get("L_z", 2.0 * math.pi))
    try:
        return SpanwiseTexture(baseline=base, family=family, L_z=L_z)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
