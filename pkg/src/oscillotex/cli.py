"""Command-line scenario runner and sweep orchestrator.

Subcommands dispatch to the worked-example modules (stokes2, couette,
toeplitz), assemble signature records via the diagnostics suite (diag),
and run the built-in verification suites (verify). Artifacts are CSV by
default with a JSON mirror via --format json; every run writes a
manifest with per-output checksums. Floating-point output uses 17
significant digits so values round-trip exactly.

Exit codes: 0 success, 2 validation, 3 numeric failure, 4 I/O.
"""

import argparse
import cmath
import concurrent.futures
import hashlib
import json
import math
import os
import platform
import sys
import tempfile
import time

import numpy as np

from . import __version__
from .config import ConfigError, load_config, scenario_defaults
from .couette import (
    ExceptionalCompatibilityError,
    Layer,
    LayerStack,
    operator_matrix,
    profile_states,
    stack_solve,
)
from .diagnostics import (
    OperatorHandle,
    PSEUDOSPECTRUM_CSV_HEADER,
    SIGNATURE_CSV_HEADER,
    SignatureRecord,
    corner_functionals,
    modal_wall_flux,
    nonnormality_metric,
    numerical_range_sample,
    pseudospectrum_grid,
    resolvent_gain,
    sideband_ratios,
    spanwise_energy_fraction,
    traction_signature,
    transfer_norm,
    unwrap_sweep,
)
from .solvers1d import (
    SOLUTION_CSV_HEADER,
    Grid1D,
    SingularSystemError,
    solution_table,
)
from .stokes2 import (
    DefectShape,
    HalfSpaceSetup,
    solve_halfspace,
    wall_impedance_numeric,
    zw1_perturbative,
)
from .toeplitz import (
    BlockSystemSpec,
    BoundUnavailableError,
    ConvergenceCertificateError,
    UnsupportedTextureError,
    assemble_blocks,
    smallness_certificate,
    solve_direct,
    solve_neumann,
    vec_norm,
)
from .viscosity import (
    ConstantPhase,
    Cosine,
    OneSided,
    PhaseOnly,
    PhaseTexture1D,
    SmoothDefect,
    SpanwiseTexture,
    TwoLayerPhase,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

_FLOAT_FMT = "%.17g"

IMPEDANCE_CSV_HEADER = ("omega", "re_z", "im_z", "abs_z", "arg_z",
                        "re_zw1", "im_zw1")
TRACTION_CSV_HEADER = ("omega", "re_tau", "im_tau")
MODES_CSV_HEADER = ("m", "kappa_m", "norm_u", "re_wall_flux", "im_wall_flux")
CORNERS_CSV_HEADER = ("r", "S", "E", "O_phi", "clipped")

_NUMERIC_ERRORS = (
    SingularSystemError,
    ExceptionalCompatibilityError,
    ConvergenceCertificateError,
    UnsupportedTextureError,
    BoundUnavailableError,
    np.linalg.LinAlgError,
    FloatingPointError,
    ZeroDivisionError,
)


# ---------------------------------------------------------------------------
# Artifact plumbing: atomic writes, tables, manifests.
# ---------------------------------------------------------------------------

def _atomic_write(path, data):
    """Write bytes so the target is either fully written or absent."""
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".oscillotex-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _fmt_value(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return _FLOAT_FMT % float(v)


def _csv_text(header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt_value(v) for v in row))
    return "\n".join(lines) + "\n"


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    return float(v)


class Artifacts:
    """Output sink recording a checksum for every artifact written."""

    def __init__(self, out_dir, fmt):
        self.out_dir = out_dir
        self.fmt = fmt
        self.checksums = {}

    def _write(self, name, data, record=True):
        _atomic_write(os.path.join(self.out_dir, name), data)
        if record:
            self.checksums[name] = hashlib.sha256(data).hexdigest()

    def write_table(self, stem, header, rows):
        rows = [tuple(row) for row in rows]
        if self.fmt == "json":
            payload = {"schema_version": 1, "header": list(header),
                       "rows": [[_json_value(v) for v in row] for row in rows]}
            self._write(stem + ".json",
                        (json.dumps(payload) + "\n").encode("utf-8"))
        else:
            self._write(stem + ".csv",
                        _csv_text(header, rows).encode("utf-8"))

    def write_json(self, name, obj, record=True):
        text = json.dumps(obj, indent=1, sort_keys=True) + "\n"
        self._write(name, text.encode("utf-8"), record=record)

    def write_bytes(self, name, data):
        self._write(name, data)


def _scenario_hash(kind, params):
    canon = json.dumps({"kind": kind, "parameters": params},
                       sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def _write_manifest(art, kind, params, t0):
    manifest = {
        "schema_version": 1,
        "tool": "oscillotex",
        "version": __version__,
        "scenario": {"kind": kind, "parameters": params},
        "scenario_hash": _scenario_hash(kind, params),
        "platform": "%s %s python %s numpy %s" % (
            platform.system(), platform.machine(),
            platform.python_version(), np.__version__),
        "wall_clock_seconds": time.perf_counter() - t0,
        "outputs": dict(sorted(art.checksums.items())),
    }
    # The manifest cannot contain its own checksum.
    art.write_json("manifest.json", manifest, record=False)


# ---------------------------------------------------------------------------
# Parameter resolution: flags > config section > fallback.
# ---------------------------------------------------------------------------

def _resolve(flag_value, defaults, key, fallback, cast=float):
    if flag_value is not None:
        return flag_value
    if key in defaults:
        return cast(defaults[key])
    return fallback


def _parse_sweep(text):
    parts = str(text).split(":")
    if len(parts) not in (3, 4):
        raise ConfigError("sweep must be START:STOP:COUNT[:lin|geo]")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"bad sweep {text!r}") from exc
    spacing = parts[3] if len(parts) == 4 else "geo"
    if count < 1:
        raise ConfigError("sweep count must be >= 1")
    if count == 1:
        return [start]
    if spacing in ("geo", "geometric"):
        if start <= 0.0 or stop <= 0.0:
            raise ConfigError("geometric sweep needs positive endpoints")
        return [float(v) for v in np.geomspace(start, stop, count)]
    if spacing in ("lin", "linear"):
        return [float(v) for v in np.linspace(start, stop, count)]
    raise ConfigError(f"unknown sweep spacing {spacing!r}")


def _omega_list(args, defaults):
    if args.omega is not None and args.omega_sweep is not None:
        raise ConfigError("give either --omega or --omega-sweep, not both")
    if args.omega is not None:
        return [float(args.omega)]
    if args.omega_sweep is not None:
        return _parse_sweep(args.omega_sweep)
    if "omega_sweep" in defaults:
        return _parse_sweep(defaults["omega_sweep"])
    if "omega" in defaults:
        return [float(defaults["omega"])]
    return [1.0]


def _worker_count(args):
    env = os.environ.get("OSCILLOTEX_THREADS")
    if env is not None:
        try:
            n = int(env)
        except ValueError as exc:
            raise ConfigError("OSCILLOTEX_THREADS must be an integer") from exc
    elif args.threads is not None:
        n = args.threads
    else:
        n = os.cpu_count() or 1
    if n < 1:
        raise ConfigError("worker count must be >= 1")
    return n


def _sweep_map(fn, omegas, workers):
    """Order-preserving parallel map over the frequency sweep."""
    if len(omegas) == 1 or workers == 1:
        return [fn(w) for w in omegas]
    pool = concurrent.futures.ThreadPoolExecutor(
        max_workers=min(workers, len(omegas)))
    with pool:
        return list(pool.map(fn, omegas))


# ---------------------------------------------------------------------------
# stokes2
# ---------------------------------------------------------------------------

def cmd_stokes2(args, cfg):
    t0 = time.perf_counter()
    d = scenario_defaults(cfg, "stokes2")
    mu0 = _resolve(args.mu0, d, "mu0", 1.0)
    rho = _resolve(args.rho, d, "rho", 1.0)
    eps = _resolve(args.eps, d, "eps", 0.0)
    ell = _resolve(args.ell, d, "ell", 0.2)
    chi = _resolve(args.chi, d, "chi", None, cast=str)
    grid_n = int(_resolve(args.grid_n, d, "grid_n", 512, cast=int))
    omegas = _omega_list(args, d)
    shape = DefectShape(kind=chi, ell=ell) if chi is not None else None
    if eps != 0.0 and shape is None:
        raise ConfigError("a nonzero eps needs --chi to pick a defect shape")

    def one(omega):
        setup = HalfSpaceSetup.build(mu0=mu0, rho=rho, omega=omega, eps=eps,
                                     shape=shape, n_cells=grid_n)
        z = wall_impedance_numeric(setup)
        z1 = zw1_perturbative(setup) if shape is not None else 0.0j
        return (omega, z.real, z.imag, abs(z), float(np.angle(z)),
                z1.real, z1.imag)

    rows = _sweep_map(one, omegas, _worker_count(args))
    art = Artifacts(args.out_dir, args.format)
    art.write_table("impedance", IMPEDANCE_CSV_HEADER, rows)
    if len(omegas) == 1:
        setup = HalfSpaceSetup.build(mu0=mu0, rho=rho, omega=omegas[0],
                                     eps=eps, shape=shape, n_cells=grid_n)
        art.write_table("profile", SOLUTION_CSV_HEADER,
                        solution_table(solve_halfspace(setup)))
    params = {"mu0": mu0, "rho": rho, "eps": eps, "chi": chi, "ell": ell,
              "grid_n": grid_n, "omegas": omegas}
    _write_manifest(art, "stokes2", params, t0)
    return EXIT_OK


# ---------------------------------------------------------------------------
# couette
# ---------------------------------------------------------------------------

def _parse_layers(spec_text):
    """'0.4:0.3,0.6:-0.2' -> [(thickness, phase), ...]."""
    if isinstance(spec_text, list):
        pairs = [(float(t), float(p)) for t, p in spec_text]
    else:
        pairs = []
        for chunk in str(spec_text).split(","):
            parts = chunk.split(":")
            if len(parts) != 2:
                raise ConfigError("layers must be thickness:phase pairs")
            pairs.append((float(parts[0]), float(parts[1])))
    if not pairs:
        raise ConfigError("at least one layer is required")
    for t, _ in pairs:
        if t <= 0.0:
            raise ConfigError("layer thicknesses must be positive")
    return pairs


def cmd_couette(args, cfg):
    t0 = time.perf_counter()
    d = scenario_defaults(cfg, "couette")
    layers_spec = args.layers if args.layers is not None else d.get("layers")
    if layers_spec is None:
        raise ConfigError("--layers is required (thickness:phase,...)")
    pairs = _parse_layers(layers_spec)
    mu0 = _resolve(args.mu0, d, "mu0", 1.0)
    rho = _resolve(args.rho, d, "rho", 1.0)
    uw = _resolve(args.uw, d, "uw", 1.0)
    grid_n = int(_resolve(args.grid_n, d, "grid_n", 256, cast=int))
    emit = _resolve(args.emit, d, "emit", "traction", cast=str)
    omegas = _omega_list(args, d)
    mus = [mu0 * cmath.exp(1j * phi) for _, phi in pairs]

    def make_stack(omega):
        layers = tuple(Layer(thickness=t, mu=m)
                       for (t, _), m in zip(pairs, mus))
        return LayerStack(layers=layers, rho=rho, omega=omega, U_w=uw)

    art = Artifacts(args.out_dir, args.format)
    if emit == "traction":
        def one(omega):
            tau = stack_solve(make_stack(omega))["tau_bottom"]
            return (omega, tau.real, tau.imag)
        art.write_table("traction", TRACTION_CSV_HEADER,
                        _sweep_map(one, omegas, _worker_count(args)))
    elif emit == "profile":
        if len(omegas) != 1:
            raise ConfigError("profile export needs a single omega")
        per_layer = max(8, grid_n // len(pairs))
        ys, us, taus = profile_states(make_stack(omegas[0]), per_layer)
        rows = [(y, u.real, u.imag, abs(u), float(np.angle(u)),
                 tau.real, tau.imag) for y, u, tau in zip(ys, us, taus)]
        art.write_table("profile", SOLUTION_CSV_HEADER, rows)
    elif emit == "operator":
        if len(omegas) != 1:
            raise ConfigError("operator export needs a single omega")
        omega = omegas[0]
        height = sum(t for t, _ in pairs)
        grid = Grid1D(height, grid_n)
        edges = np.concatenate(([0.0], np.cumsum([t for t, _ in pairs])))
        idx = np.clip(np.searchsorted(edges, grid.midpoints, side="right") - 1,
                      0, len(pairs) - 1)
        mu_mid = np.asarray(mus, dtype=complex)[idx]
        ops = operator_matrix(mu_mid, grid, rho, omega)
        matrix = np.ascontiguousarray(ops["L"].astype("<c16"))
        art.write_bytes("operator.bin", matrix.tobytes())
        art.write_json("operator.json", {
            "schema_version": 1,
            "data": "operator.bin",
            "rows": matrix.shape[0],
            "cols": matrix.shape[1],
            "dtype": "complex128",
            "layout": "row-major",
            "element": "re,im pairs of 8-byte IEEE-754 floats",
            "byte_order": "little",
            "contents": "interior flux-form operator with reaction term, "
                        "homogeneous Dirichlet walls",
            "h": grid.h,
            "H": height,
            "omega": omega,
            "rho": rho,
        })
    else:
        raise ConfigError("emit must be one of traction|profile|operator")

    params = {"layers": [[t, p] for t, p in pairs], "mu0": mu0, "rho": rho,
              "uw": uw, "grid_n": grid_n, "emit": emit, "omegas": omegas}
    _write_manifest(art, "couette", params, t0)
    return EXIT_OK


# ---------------------------------------------------------------------------
# toeplitz
# ---------------------------------------------------------------------------

def _make_family(kind, eps, m0, band):
    kind = str(kind).lower()
    if kind == "onesided":
        return OneSided(eps=eps, m0=m0)
    if kind == "cosine":
        return Cosine(eps=eps, m0=m0)
    if kind == "phaseonly":
        return PhaseOnly(eps=eps, m0=m0, band=band)
    raise ConfigError("family must be one of onesided|cosine|phaseonly")


def _parse_method(text):
    text = str(text).lower()
    if text == "direct":
        return "direct", None
    if text.startswith("neumann:"):
        try:
            order = int(text.split(":", 1)[1])
        except ValueError as exc:
            raise ConfigError("neumann method needs an integer order") from exc
        if order < 0:
            raise ConfigError("neumann order must be >= 0")
        return "neumann", order
    raise ConfigError("method must be direct or neumann:N")


def cmd_toeplitz(args, cfg):
    t0 = time.perf_counter()
    d = scenario_defaults(cfg, "toeplitz")
    family = _resolve(args.family, d, "family", None, cast=str)
    if family is None:
        raise ConfigError("--family is required")
    eps = _resolve(args.eps, d, "eps", 0.0)
    m0 = int(_resolve(args.m0, d, "m0", 1, cast=int))
    band = int(_resolve(args.band_n, d, "band_n", 2, cast=int))
    modes_m = int(_resolve(args.modes_m, d, "modes_m", 8, cast=int))
    lz = _resolve(args.lz, d, "lz", 2.0 * math.pi)
    grid_n = int(_resolve(args.grid_n, d, "grid_n", 200, cast=int))
    height = _resolve(args.height, d, "height", 1.0)
    mu0 = _resolve(args.mu0, d, "mu0", 1.0)
    rho = _resolve(args.rho, d, "rho", 1.0)
    method, order = _parse_method(_resolve(args.method, d, "method",
                                           "direct", cast=str))
    # Traction phases unwrap upward from the lowest frequency.
    omegas = sorted(_omega_list(args, d))

    def one(omega):
        grid = Grid1D(height, grid_n)
        base = np.full(grid_n + 1, complex(mu0))
        texture = SpanwiseTexture(
            baseline=base, family=_make_family(family, eps, m0, band), L_z=lz)
        spec = BlockSystemSpec(M=modes_m, grid=grid, texture=texture,
                               rho=rho, omega=omega)
        blocks = assemble_blocks(spec)
        if method == "direct":
            sol = solve_direct(blocks)
        else:
            sol = solve_neumann(blocks, order)
        r_plus, r_minus = sideband_ratios(sol)
        t_plus, t_minus = transfer_norm(blocks)
        a_plus, a_minus, th_plus, th_minus = traction_signature(sol)
        weights = np.full(blocks.n_y, grid.h)
        delta_nn = nonnormality_metric(
            OperatorHandle(blocks.diag_dense(0), weights, label="L(kappa_0)"))
        taus = modal_wall_flux(sol)
        record = SignatureRecord(
            omega=omega, R_plus=r_plus, R_minus=r_minus,
            Phi_M=spanwise_energy_fraction(sol),
            T_plus=t_plus, T_minus=t_minus,
            A_plus=a_plus, A_minus=a_minus,
            Theta_plus=th_plus, Theta_minus=th_minus,
            Delta_nn=delta_nn, Z_w=taus[0],
            power_re_res=sol.residual, power_im_res=0.0)
        return record, sol, blocks, spec

    results = _sweep_map(one, omegas, _worker_count(args))
    rows = [list(rec.to_row()) for rec, _, _, _ in results]
    theta_plus = unwrap_sweep([r[8] for r in rows])
    theta_minus = unwrap_sweep([r[9] for r in rows])
    for row, tp, tm in zip(rows, theta_plus, theta_minus):
        row[8] = tp
        row[9] = tm

    art = Artifacts(args.out_dir, args.format)
    art.write_table("signature", SIGNATURE_CSV_HEADER, rows)
    if len(omegas) == 1:
        _, sol, blocks, spec = results[0]
        taus = modal_wall_flux(sol)
        mode_rows = [(m, spec.wavenumber(m), vec_norm(spec, sol.modes[m]),
                      taus[m].real, taus[m].imag) for m in spec.modes]
        art.write_table("modes", MODES_CSV_HEADER, mode_rows)
        cert = sol.certificate or smallness_certificate(blocks)
        art.write_json("certificate.json", {
            "schema_version": 1,
            "g_max": cert.g_max,
            "k_max": cert.k_max,
            "epsT_bound": cert.epsT_bound,
            "converges": cert.converges,
            "w_norm": cert.w_norm,
            "remainder_bounds": {str(n): cert.remainder_bound(n)
                                 for n in (1, 2, 3, 4)},
            "detail": cert.detail,
        })
    params = {"family": family, "eps": eps, "m0": m0, "band_n": band,
              "modes_m": modes_m, "lz": lz, "grid_n": grid_n,
              "height": height, "mu0": mu0, "rho": rho,
              "method": method if order is None else f"{method}:{order}",
              "omegas": omegas}
    _write_manifest(art, "toeplitz", params, t0)
    return EXIT_OK


# ---------------------------------------------------------------------------
# diag
# ---------------------------------------------------------------------------

def _parse_texture(text, grid_n, height):
    parts = str(text).split(":")
    kind = parts[0].lower()
    try:
        if kind == "constant" and len(parts) == 2:
            return ConstantPhase(phi0=float(parts[1]))
        if kind == "twolayer" and len(parts) == 4:
            return TwoLayerPhase(phi1=float(parts[1]), phi2=float(parts[2]),
                                 y_c=float(parts[3]))
        if kind == "defect" and len(parts) == 3:
            eps, ell = float(parts[1]), float(parts[2])
            nodes = np.linspace(0.0, height, grid_n + 1)
            chi = np.where(nodes <= ell,
                           0.5 * (1.0 + np.cos(math.pi * np.minimum(
                               nodes / ell, 1.0))), 0.0)
            return SmoothDefect(eps=eps, chi=chi, ell=ell)
    except ValueError as exc:
        raise ConfigError(f"bad texture {text!r}: {exc}") from exc
    raise ConfigError(
        "texture must be constant:PHI0 | twolayer:PHI1:PHI2:YC | "
        "defect:EPS:ELL")


def _parse_lambda_grid(text):
    parts = str(text).split(":")
    if len(parts) != 6:
        raise ConfigError("lambda grid must be RE0:RE1:NRE:IM0:IM1:NIM")
    re0, re1, nre = float(parts[0]), float(parts[1]), int(parts[2])
    im0, im1, nim = float(parts[3]), float(parts[4]), int(parts[5])
    if nre < 1 or nim < 1:
        raise ConfigError("lambda grid counts must be >= 1")
    res = np.linspace(re0, re1, nre)
    ims = np.linspace(im0, im1, nim)
    return res[None, :] + 1j * ims[:, None]


def _load_field(header_path):
    with open(header_path, "r", encoding="utf-8") as fh:
        hdr = json.load(fh)
    if hdr.get("schema_version") != 1:
        raise ConfigError("field header: unsupported schema_version")
    if hdr.get("dtype") != "complex128" or hdr.get("byte_order") != "little":
        raise ConfigError("field header: need little-endian complex128 data")
    if hdr.get("layout") != "row-major":
        raise ConfigError("field header: need row-major layout")
    shape = tuple(int(v) for v in hdr["shape"])
    if len(shape) != 2:
        raise ConfigError("field header: shape must be [ny, nx]")
    h = float(hdr["h"])
    base = os.path.dirname(os.path.abspath(header_path))

    def read(name, dtype, count):
        with open(os.path.join(base, name), "rb") as fh:
            buf = fh.read()
        arr = np.frombuffer(buf, dtype=dtype)
        if arr.size != count:
            raise ConfigError(f"field component {name}: size mismatch")
        return arr.reshape(shape)

    n = shape[0] * shape[1]
    comps = hdr.get("components", {})
    if "vx" not in comps or "vy" not in comps:
        raise ConfigError("field header: components need vx and vy entries")
    vx = read(comps["vx"], "<c16", n)
    vy = read(comps["vy"], "<c16", n)
    phi = read(hdr["phi"], "<f8", n) if "phi" in hdr else None
    return vx, vy, phi, h


def cmd_diag(args, cfg):
    t0 = time.perf_counter()
    d = scenario_defaults(cfg, "diag")
    emit = _resolve(args.emit, d, "emit", "report", cast=str)
    art = Artifacts(args.out_dir, args.format)

    if emit == "corners":
        field = args.field if args.field is not None else d.get("field")
        if field is None:
            raise ConfigError("corners export needs --field HEADER.json")
        center_txt = _resolve(args.center, d, "center", None, cast=str)
        radii_txt = _resolve(args.radii, d, "radii", None, cast=str)
        if center_txt is None or radii_txt is None:
            raise ConfigError("corners export needs --center and --radii")
        cx, cy = (float(v) for v in str(center_txt).split(":"))
        r0, r1, nr = str(radii_txt).split(":")
        radii = [float(v) for v in np.linspace(float(r0), float(r1), int(nr))]
        vx, vy, phi, h = _load_field(field)
        out = corner_functionals(vx, vy, h, (cx, cy), radii, phi=phi)
        rows = []
        for i, r in enumerate(out["radii"]):
            o = out["O_phi"][i] if out["O_phi"] is not None else 0.0
            rows.append((r, out["S"][i], out["E"][i], o,
                         1 if out["clipped"] else 0))
        art.write_table("corners", CORNERS_CSV_HEADER, rows)
        params = {"emit": emit, "field": os.path.basename(str(field)),
                  "center": [cx, cy], "radii": radii}
        _write_manifest(art, "diag", params, t0)
        return EXIT_OK

    texture_txt = args.texture if args.texture is not None else d.get("texture")
    if texture_txt is None:
        raise ConfigError("--texture is required for report/pseudospectrum")
    mu0 = _resolve(args.mu0, d, "mu0", 1.0)
    height = _resolve(args.height, d, "height", 1.0)
    grid_n = int(_resolve(args.grid_n, d, "grid_n", 256, cast=int))
    rho = _resolve(args.rho, d, "rho", 1.0)
    omega = _omega_list(args, d)[0]
    profile = _parse_texture(texture_txt, grid_n, height)
    texture = PhaseTexture1D(mu0=mu0, H=height, profile=profile)
    grid = Grid1D(height, grid_n)
    ops = operator_matrix(texture, grid, rho, omega)
    weights = np.full(grid_n - 1, grid.h)
    a_op = OperatorHandle(ops["A_phi"], weights, label="A_phi")
    l_op = OperatorHandle(ops["L"], weights, label="L")

    if emit == "report":
        phi_max = float(np.max(np.abs(texture.phi(grid.midpoints))))
        rng = numerical_range_sample(a_op, sector_tan=math.tan(phi_max))
        art.write_json("report.json", {
            "schema_version": 1,
            "texture": str(texture_txt),
            "n_interior": a_op.n,
            "omega": omega,
            "rho": rho,
            "mu0": mu0,
            "H": height,
            "delta_nn": nonnormality_metric(a_op),
            "resolvent_gain": resolvent_gain(l_op),
            "sector": {
                "tan_bound": math.tan(phi_max),
                "max_excess": rng["sector"]["max_excess"],
                "ok": rng["sector"]["ok"],
            },
        })
    elif emit == "pseudospectrum":
        lg = args.lambda_grid if args.lambda_grid is not None \
            else d.get("lambda_grid")
        if lg is None:
            raise ConfigError("pseudospectrum export needs --lambda-grid")
        lam = _parse_lambda_grid(lg)
        sig = pseudospectrum_grid(l_op, lam)
        rows = [(lam[i, j].real, lam[i, j].imag, sig[i, j])
                for i in range(lam.shape[0]) for j in range(lam.shape[1])]
        art.write_table("pseudospectrum", PSEUDOSPECTRUM_CSV_HEADER, rows)
    else:
        raise ConfigError("emit must be one of report|pseudospectrum|corners")

    params = {"emit": emit, "texture": str(texture_txt), "mu0": mu0,
              "height": height, "grid_n": grid_n, "rho": rho, "omega": omega}
    _write_manifest(art, "diag", params, t0)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def cmd_verify(args, cfg):
    del cfg
    from .acceptance import run_suite
    results = run_suite(args.suite)
    failed = 0
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        print(f"{status} criterion {res.number:2d} [{res.seconds:6.2f}s] "
              f"{res.title}: {res.detail}")
        if not res.passed:
            failed += 1
    total = sum(res.seconds for res in results)
    print(f"{len(results) - failed}/{len(results)} criteria passed "
          f"in {total:.2f}s ({args.suite} suite)")
    return EXIT_OK if failed == 0 else 1


# ---------------------------------------------------------------------------
# Parser and entry point.
# ---------------------------------------------------------------------------

def _add_common(sp, sweep=True):
    sp.add_argument("--config", default=None,
                    help="TOML or JSON parameter file (schema_version 1)")
    sp.add_argument("--out-dir", default=".", help="artifact directory")
    sp.add_argument("--threads", type=int, default=None,
                    help="sweep worker count (OSCILLOTEX_THREADS overrides)")
    sp.add_argument("--format", choices=("csv", "json"), default="csv",
                    help="table artifact encoding")
    if sweep:
        sp.add_argument("--omega", type=float, default=None,
                        help="single drive frequency")
        sp.add_argument("--omega-sweep", default=None,
                        metavar="START:STOP:COUNT[:lin|geo]",
                        help="frequency sweep (geometric by default)")


def build_parser():
    p = argparse.ArgumentParser(
        prog="oscillotex",
        description="Oscillatory shear over complex-viscosity phase "
                    "textures: worked-example solvers and diagnostics.")
    p.add_argument("--version", action="version",
                   version=f"oscillotex {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    st = sub.add_parser("stokes2", help="half-space Stokes-II impedance")
    _add_common(st)
    st.add_argument("--mu0", type=float, default=None)
    st.add_argument("--rho", type=float, default=None)
    st.add_argument("--eps", type=float, default=None,
                    help="defect phase amplitude")
    st.add_argument("--chi", choices=("tophat", "ramp", "exp"), default=None,
                    help="defect shape")
    st.add_argument("--ell", type=float, default=None, help="defect length")
    st.add_argument("--grid-n", type=int, default=None)

    co = sub.add_parser("couette", help="layered oscillatory Couette channel")
    _add_common(co)
    co.add_argument("--layers", default=None,
                    metavar="T:PHI,T:PHI,...",
                    help="layer thickness:phase list, bottom to top")
    co.add_argument("--mu0", type=float, default=None)
    co.add_argument("--rho", type=float, default=None)
    co.add_argument("--uw", type=float, default=None, help="top wall velocity")
    co.add_argument("--grid-n", type=int, default=None)
    co.add_argument("--emit", choices=("traction", "profile", "operator"),
                    default=None)

    tp = sub.add_parser("toeplitz", help="spanwise mode-coupled block system")
    _add_common(tp)
    tp.add_argument("--family", choices=("onesided", "cosine", "phaseonly"),
                    default=None)
    tp.add_argument("--eps", type=float, default=None)
    tp.add_argument("--m0", type=int, default=None, help="texture stride")
    tp.add_argument("--band-n", type=int, default=None,
                    help="phaseonly Bessel band")
    tp.add_argument("--modes-m", type=int, default=None,
                    help="mode truncation M")
    tp.add_argument("--lz", type=float, default=None, help="spanwise period")
    tp.add_argument("--grid-n", type=int, default=None)
    tp.add_argument("--height", type=float, default=None)
    tp.add_argument("--mu0", type=float, default=None,
                    help="constant baseline viscosity")
    tp.add_argument("--rho", type=float, default=None)
    tp.add_argument("--method", default=None, metavar="direct|neumann:N")

    dg = sub.add_parser("diag", help="operator diagnostics and field "
                                     "functionals")
    _add_common(dg)
    dg.add_argument("--texture", default=None,
                    metavar="constant:PHI|twolayer:P1:P2:YC|defect:EPS:ELL")
    dg.add_argument("--mu0", type=float, default=None)
    dg.add_argument("--height", type=float, default=None)
    dg.add_argument("--grid-n", type=int, default=None)
    dg.add_argument("--rho", type=float, default=None)
    dg.add_argument("--emit", choices=("report", "pseudospectrum", "corners"),
                    default=None)
    dg.add_argument("--lambda-grid", default=None,
                    metavar="RE0:RE1:NRE:IM0:IM1:NIM")
    dg.add_argument("--field", default=None,
                    help="2D field header JSON for corner functionals")
    dg.add_argument("--center", default=None, metavar="X:Y")
    dg.add_argument("--radii", default=None, metavar="R0:R1:COUNT")

    vf = sub.add_parser("verify", help="run the acceptance criteria")
    vf.add_argument("suite", choices=("quick", "full"))
    return p


_HANDLERS = {
    "stokes2": cmd_stokes2,
    "couette": cmd_couette,
    "toeplitz": cmd_toeplitz,
    "diag": cmd_diag,
    "verify": cmd_verify,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if getattr(args, "config", None) else {}
        if getattr(args, "out_dir", None):
            os.makedirs(args.out_dir, exist_ok=True)
        return _HANDLERS[args.command](args, cfg)
    except _NUMERIC_ERRORS as exc:
        print(f"oscillotex: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, ValueError, TypeError, KeyError) as exc:
        print(f"oscillotex: invalid scenario: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"oscillotex: i/o failure: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
