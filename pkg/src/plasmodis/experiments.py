"""Configuration-driven experiment drivers: single trajectories, frequency
and coupling scans, saturation-curve extrapolation, and CSV/JSON export.

A run is described by a sectioned key=value config file (sections: molecule,
grid, mode, cap, run, scan) with command-line overrides layered on top. Scan
drivers farm independent trajectories out to worker processes and gather the
results by index, so output is deterministic regardless of completion order.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import multiprocessing
import os
from configparser import ConfigParser
from dataclasses import dataclass, field, fields, replace

import numpy as np
from scipy.optimize import curve_fit

from . import __version__
from .errors import (DataConsistencyError, FitQualityError, ParameterError,
                     PlasmodisError)
from .grid import build_grid
from .molecule import SurrogateParams, load_molecule, surrogate_molecule
from .plasmon import (DrudeMetal, SphereEmitterGeometry, fit_pseudomode,
                      mode_from_values, spectral_density)
from .propagation import IntegratorConfig, initial_state, propagate
from .system import CHANNELS, CAPConfig, assemble, induced_decay_rate

__all__ = [
    "ExperimentConfig",
    "TrajectoryRecord",
    "run_single",
    "scan_frequency",
    "scan_coupling",
    "fit_saturation",
    "write_trajectory",
]


@dataclass
class ExperimentConfig:
    """All knobs of a run, with physically sensible defaults.

    `provenance` tracks where each value came from (default, config file, or
    command line) for --print-config.
    """

    # molecule
    molecule_source: str = "surrogate"      # surrogate | files
    vx_file: str | None = None
    vb_file: str | None = None
    dip_file: str | None = None
    reduced_mass: float = 918.076336        # electron masses
    surrogate: SurrogateParams = field(default_factory=SurrogateParams)
    # grid
    r_min: float = 0.5                      # bohr
    r_max: float = 17.0                     # bohr
    n_elements: int = 46
    order: int = 9                          # Lobatto points per element
    # mode
    mode_source: str = "values"             # values | sphere
    omega_p: float = 7.6                    # eV
    kappa: float = 0.476                    # eV
    e_1ph: float = 70.0                     # mV/bohr
    plasma_frequency: float = 15.1          # eV, sphere source
    damping_rate: float = 0.4425            # eV
    radius: float = 20.0                    # nm
    background_index: float = 1.75
    emitter_distance: float = 0.7           # nm
    orientation: str = "radial"
    omega_lo: float = 4.0                   # eV, spectral-density window
    omega_hi: float = 11.0
    n_omega: int = 2001
    # cap
    cap_strength: float = 1e-4              # hartree/bohr^4
    cap_r_abs: float = 12.0                 # bohr
    # run
    t_final: float = 1000.0                 # fs
    output_stride: float = 1.0              # fs
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    method: str = "auto"
    spectral_substep: float = 0.005         # fs
    record_densities: bool = False
    # scan
    omega_p_list: tuple = ()
    e1ph_list: tuple = ()
    threads: int = 1
    # output
    out_dir: str | None = None
    provenance: dict = field(default_factory=dict, repr=False)

    _SECTION_OF = {
        "molecule": ("molecule_source", "vx_file", "vb_file", "dip_file",
                     "reduced_mass"),
        "grid": ("r_min", "r_max", "n_elements", "order"),
        "mode": ("mode_source", "omega_p", "kappa", "e_1ph", "plasma_frequency",
                 "damping_rate", "radius", "background_index",
                 "emitter_distance", "orientation", "omega_lo", "omega_hi",
                 "n_omega"),
        "cap": ("cap_strength", "cap_r_abs"),
        "run": ("t_final", "output_stride", "rel_tol", "abs_tol", "method",
                "spectral_substep", "record_densities"),
        "scan": ("omega_p_list", "e1ph_list", "threads"),
    }

    # section-local spellings accepted in config files
    _ALIASES = {
        ("cap", "strength"): "cap_strength",
        ("cap", "r_abs"): "cap_r_abs",
        ("molecule", "source"): "molecule_source",
        ("mode", "source"): "mode_source",
    }

    def __post_init__(self):
        if self.molecule_source not in ("surrogate", "files"):
            raise ParameterError(
                f"molecule source must be 'surrogate' or 'files', "
                f"got {self.molecule_source!r}"
            )
        if self.mode_source not in ("values", "sphere"):
            raise ParameterError(
                f"mode source must be 'values' or 'sphere', got {self.mode_source!r}"
            )
        if self.molecule_source == "files" and not (
            self.vx_file and self.vb_file and self.dip_file
        ):
            raise ParameterError(
                "molecule source 'files' needs vx_file, vb_file and dip_file"
            )
        for name in ("reduced_mass", "t_final", "output_stride"):
            if getattr(self, name) < 0 or (name != "t_final" and getattr(self, name) == 0):
                raise ParameterError(f"{name} must be positive")
        if self.threads < 1:
            raise ParameterError("threads must be >= 1")

    # -- construction -----------------------------------------------------

    @classmethod
    def from_file(cls, path):
        parser = ConfigParser(inline_comment_prefixes=("#", ";"))
        with open(path) as fh:
            parser.read_file(fh)
        values = {}
        provenance = {}
        surrogate_kwargs = {}
        field_types = {f.name: f.type for f in fields(cls)}
        known = {name: sec for sec, names in cls._SECTION_OF.items() for name in names}
        for section in parser.sections():
            if section not in cls._SECTION_OF and section != "surrogate":
                raise ParameterError(f"{path}: unknown config section [{section}]")
            for key, raw in parser.items(section):
                if section == "surrogate":
                    if key not in {f.name for f in fields(SurrogateParams)}:
                        raise ParameterError(f"{path}: unknown surrogate key {key!r}")
                    surrogate_kwargs[key] = _parse_scalar(raw, key)
                    continue
                key = cls._ALIASES.get((section, key), key)
                if key not in known or known[key] != section:
                    raise ParameterError(
                        f"{path}: unknown key {key!r} in section [{section}]"
                    )
                values[key] = _parse_value(raw, key, field_types[key])
                provenance[key] = f"config file ({os.path.basename(path)})"
        if surrogate_kwargs:
            values["surrogate"] = SurrogateParams(**surrogate_kwargs)
            provenance["surrogate"] = f"config file ({os.path.basename(path)})"
        return cls(**values, provenance=provenance)

    def with_overrides(self, **overrides):
        clean = {k: v for k, v in overrides.items() if v is not None}
        provenance = dict(self.provenance)
        provenance.update({k: "command line" for k in clean})
        return replace(self, **clean, provenance=provenance)

    # -- builders ---------------------------------------------------------

    def build_grid(self):
        return build_grid(self.r_min, self.r_max, self.n_elements, self.order)

    def build_molecule(self, grid=None):
        grid = grid or self.build_grid()
        if self.molecule_source == "files":
            return load_molecule(self.vx_file, self.vb_file, self.dip_file,
                                 grid, self.reduced_mass)
        params = replace(self.surrogate, reduced_mass=self.reduced_mass)
        return surrogate_molecule(params, grid)

    def build_mode(self):
        if self.mode_source == "values":
            return mode_from_values(self.omega_p, self.kappa, self.e_1ph)
        metal = DrudeMetal(self.plasma_frequency, self.damping_rate)
        geom = SphereEmitterGeometry(self.radius, self.background_index,
                                     self.emitter_distance, self.orientation)
        omega = np.linspace(self.omega_lo, self.omega_hi, self.n_omega)
        return fit_pseudomode(spectral_density(metal, geom, omega))

    def cap_config(self):
        return CAPConfig(strength=self.cap_strength, r_abs=self.cap_r_abs)

    def integrator_config(self):
        return IntegratorConfig(
            rel_tol=self.rel_tol, abs_tol=self.abs_tol,
            output_stride=self.output_stride, method=self.method,
            spectral_substep_fs=self.spectral_substep,
            record_densities=self.record_densities,
        )

    def as_dict(self):
        d = dataclasses.asdict(self)
        d.pop("provenance")
        return d

    def print_lines(self):
        """`section.key = value   [source]` lines for --print-config."""
        lines = []
        for section, names in self._SECTION_OF.items():
            for name in names:
                src = self.provenance.get(name, "default")
                lines.append(f"{section}.{name} = {getattr(self, name)!r}   [{src}]")
        src = self.provenance.get("surrogate", "default")
        for f in fields(SurrogateParams):
            lines.append(
                f"surrogate.{f.name} = {getattr(self.surrogate, f.name)!r}   [{src}]"
            )
        return lines


def _parse_scalar(raw, key):
    try:
        if raw.lower() in ("true", "false"):
            return raw.lower() == "true"
        return float(raw)
    except ValueError as exc:
        raise ParameterError(f"cannot parse value {raw!r} for {key}") from exc


def _parse_axis(raw):
    """Axis syntax: comma-separated values, or lo:hi:n for a uniform grid."""
    raw = raw.strip()
    if ":" in raw:
        parts = raw.split(":")
        if len(parts) != 3:
            raise ParameterError(f"axis spec {raw!r} is not lo:hi:n")
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
        if n < 1:
            raise ParameterError("axis needs at least one point")
        return tuple(np.linspace(lo, hi, n))
    return tuple(float(tok) for tok in raw.replace(",", " ").split())


def _parse_value(raw, key, type_name):
    if key.endswith("_list"):
        return _parse_axis(raw)
    if type_name in ("int",):
        return int(raw)
    if type_name in ("float",):
        return float(raw)
    if type_name in ("bool",):
        if raw.lower() not in ("true", "false", "1", "0", "yes", "no"):
            raise ParameterError(f"cannot parse boolean {raw!r} for {key}")
        return raw.lower() in ("true", "1", "yes")
    return raw  # strings (paths, source selectors)


# ---------------------------------------------------------------------------
# trajectory record


@dataclass
class TrajectoryRecord:
    """Time series of a single trajectory.

    p_a holds the per-channel population still inside the simulation box,
    p_d the per-channel dissociated (absorbed) probability; channel order is
    CHANNELS = (X0, B0, X1).
    """

    times: np.ndarray           # fs
    p_a: np.ndarray             # (3, T)
    p_d: np.ndarray             # (3, T)
    trace_total: np.ndarray     # (T,)
    params: dict
    densities: dict | None = None   # channel -> (T, n) node probabilities
    density_nodes: np.ndarray | None = None

    @property
    def p_d_total(self):
        return self.p_d.sum(axis=0)

    def summary(self):
        return {
            "t_final_fs": float(self.times[-1]),
            "P_A_final": {ch: float(self.p_a[k, -1]) for k, ch in enumerate(CHANNELS)},
            "P_D_final": {ch: float(self.p_d[k, -1]) for k, ch in enumerate(CHANNELS)},
            "P_D_total_final": float(self.p_d_total[-1]),
            "trace_deficit_max": float(np.abs(self.trace_total - 1.0).max()),
        }

    def validate(self, tol=1e-8):
        if np.any(self.p_a < -tol) or np.any(self.p_a > 1 + tol):
            raise DataConsistencyError("channel population left [0, 1]")
        if np.any(self.p_d < -tol) or np.any(self.p_d > 1 + tol):
            raise DataConsistencyError("dissociated probability left [0, 1]")
        if np.abs(self.trace_total - 1.0).max() > tol:
            raise DataConsistencyError("total probability not conserved")
        if np.any(np.diff(self.p_d, axis=1) < -tol):
            raise DataConsistencyError("dissociated probability not monotone")


def run_single(config: ExperimentConfig) -> TrajectoryRecord:
    """Build everything from the config, propagate, optionally write output."""
    grid = config.build_grid()
    model = config.build_molecule(grid)
    mode = config.build_mode()
    ops = assemble(model, mode, config.cap_config())
    state0 = initial_state(model)
    result = propagate(state0, ops, config.t_final, config.integrator_config())
    record = TrajectoryRecord(
        times=result.times,
        p_a=result.populations,
        p_d=result.tallies,
        trace_total=result.trace_total,
        params={
            **config.as_dict(),
            "mode_fitted": {"omega_p": mode.omega_p, "kappa": mode.kappa,
                            "e_1ph": mode.e_1ph},
        },
        densities=result.densities,
        density_nodes=grid.nodes if result.densities else None,
    )
    record.validate(tol=1e5 * max(config.rel_tol, config.abs_tol))
    if config.out_dir:
        write_trajectory(record, config.out_dir)
    return record


# ---------------------------------------------------------------------------
# scans


def _scan_point(payload):
    """Worker: one trajectory at overridden (omega_p, e_1ph). Returns either
    ('ok', times, p_d_total series, final per-channel tallies) or
    ('error', message)."""
    config, omega_p, e_1ph = payload
    try:
        cfg = config.with_overrides(
            omega_p=omega_p, e_1ph=e_1ph, mode_source="values",
            record_densities=False, out_dir=None,
        )
        record = run_single(cfg)
        return ("ok", record.times, record.p_d_total, record.p_d[:, -1])
    except PlasmodisError as exc:
        return ("error", f"{type(exc).__name__}: {exc}")


def _run_points(config, payloads):
    if config.threads > 1:
        with multiprocessing.Pool(config.threads) as pool:
            return pool.map(_scan_point, payloads)
    return [_scan_point(p) for p in payloads]


def scan_frequency(config: ExperimentConfig):
    """P_D(t; omega_p) over the configured frequency axis, plus the
    propagation-free induced-decay-rate map kappa_B*(R; omega_p).

    Returns a dict with the time grid, axes, the P_D map (n_omega, T), the
    rate map (n_omega, n_nodes) in eV, and per-point failures.
    """
    if not config.omega_p_list:
        raise ParameterError("scan-freq needs a non-empty omega_p axis")
    omegas = list(config.omega_p_list)
    results = _run_points(config, [(config, w, None) for w in omegas])

    grid = config.build_grid()
    model = config.build_molecule(grid)
    from .units import HARTREE_EV
    rate_map = np.full((len(omegas), grid.n_basis), np.nan)
    failures = {}
    for i, w in enumerate(omegas):
        try:
            mode = mode_from_values(w, config.kappa, config.e_1ph)
            ops = assemble(model, mode, config.cap_config())
            rate_map[i] = induced_decay_rate(ops)[:, 1] * HARTREE_EV
        except PlasmodisError as exc:
            failures[f"{w:g}"] = f"{type(exc).__name__}: {exc}"

    times = None
    pd_map = None
    for i, res in enumerate(results):
        if res[0] == "error":
            failures[f"{omegas[i]:g}"] = res[1]
            continue
        _, t, series, _ = res
        if times is None:
            times = t
            pd_map = np.full((len(omegas), len(t)), np.nan)
        pd_map[i] = series
    if times is None:
        raise ParameterError("every scan point failed; see failures")
    return {
        "omega_p": np.array(omegas), "times": times, "p_d": pd_map,
        "nodes": grid.nodes, "kappa_b": rate_map, "failures": failures,
    }


def scan_coupling(config: ExperimentConfig):
    """Final dissociation probability P_D(t_f) on the E_1ph x omega_p grid."""
    if not config.omega_p_list or not config.e1ph_list:
        raise ParameterError("scan-coupling needs omega_p and e1ph axes")
    omegas = list(config.omega_p_list)
    e1phs = list(config.e1ph_list)
    payloads = [(config, w, e) for e in e1phs for w in omegas]
    results = _run_points(config, payloads)

    pd_final = np.full((len(e1phs), len(omegas)), np.nan)
    failures = {}
    for idx, res in enumerate(results):
        i, j = divmod(idx, len(omegas))
        if res[0] == "error":
            failures[f"{e1phs[i]:g},{omegas[j]:g}"] = res[1]
            continue
        pd_final[i, j] = res[2][-1]
    return {
        "e_1ph": np.array(e1phs), "omega_p": np.array(omegas),
        "p_d_final": pd_final, "failures": failures,
    }


# ---------------------------------------------------------------------------
# saturation fit


def _saturation(t, p_inf, tau_s, t0):
    return p_inf * (1.0 - np.exp(-(t - t0) / tau_s))


def fit_saturation(times, p_d, window_start=None):
    """Fit P(t) = P_inf (1 - exp(-(t - t0)/tau_s)) to a late-time window.

    Returns (p_inf, rate = 1/tau_s, residual). The window defaults to the
    last 60% of the series. Non-monotone input raises DataConsistencyError.
    """
    times = np.asarray(times, dtype=float)
    p_d = np.asarray(p_d, dtype=float)
    if times.shape != p_d.shape or times.ndim != 1:
        raise ParameterError("times and p_d must be matching 1D arrays")
    if np.any(np.diff(p_d) < -1e-10):
        raise DataConsistencyError("series must be non-decreasing")
    if window_start is None:
        window_start = times[0] + 0.4 * (times[-1] - times[0])
    sel = times >= window_start
    if sel.sum() < 10:
        raise DataConsistencyError("need at least 10 samples in the fit window")
    t, p = times[sel], p_d[sel]

    span = p[-1] - p[0]
    if span < 1e-12:   # already saturated (or constant): the limit is the level
        return float(p[-1]), 0.0, float(np.std(p))
    tau0 = max((t[-1] - t[0]) / 3.0, np.finfo(float).tiny)
    p0 = [max(p[-1], 1e-12), tau0, t[0] - tau0]
    try:
        popt, _ = curve_fit(_saturation, t, p, p0=p0, maxfev=20000)
    except RuntimeError as exc:
        raise FitQualityError(f"saturation fit did not converge: {exc}") from exc
    p_inf, tau_s, _ = popt
    if p_inf <= 0 or p_inf > 1.5 or tau_s <= 0:
        raise FitQualityError(
            f"degenerate saturation fit (P_inf = {p_inf:.3g}, tau_s = {tau_s:.3g}); "
            "the series may be too far from saturation"
        )
    residual = float(np.sqrt(np.mean((p - _saturation(t, *popt)) ** 2)))
    return float(p_inf), float(1.0 / tau_s), residual


# ---------------------------------------------------------------------------
# output writers


def _grid_hash(nodes):
    return hashlib.sha256(np.ascontiguousarray(nodes).tobytes()).hexdigest()[:16]


def _metadata(params, extra=None):
    meta = {"version": __version__, "params": params}
    if extra:
        meta.update(extra)
    return meta


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, default=str)
        fh.write("\n")


def write_trajectory(record, out_dir, stem="trajectory"):
    """CSV time series + JSON metadata (+ per-channel density tables)."""
    os.makedirs(out_dir, exist_ok=True)
    table = np.column_stack([record.times, record.p_a.T, record.p_d.T,
                             record.trace_total])
    header = ("time_fs," + ",".join(f"P_A_{c}" for c in CHANNELS) + ","
              + ",".join(f"P_D_{c}" for c in CHANNELS) + ",trace_total")
    csv_path = os.path.join(out_dir, f"{stem}.csv")
    np.savetxt(csv_path, table, delimiter=",", header=header, comments="")
    extra = {"summary": record.summary()}
    if record.density_nodes is not None:
        extra["grid_hash"] = _grid_hash(record.density_nodes)
        for ch in CHANNELS:
            dens = record.densities[ch]
            dtable = np.column_stack([record.times, dens])
            dheader = "time_fs," + ",".join(f"{r:.6f}" for r in record.density_nodes)
            np.savetxt(os.path.join(out_dir, f"{stem}_density_{ch}.csv"),
                       dtable, delimiter=",", header=dheader, comments="")
    _write_json(os.path.join(out_dir, f"{stem}.json"),
                _metadata(record.params, extra))
    return csv_path


def write_frequency_scan(scan, out_dir, params):
    os.makedirs(out_dir, exist_ok=True)
    pd_table = np.column_stack([scan["times"], scan["p_d"].T])
    pd_header = "time_fs," + ",".join(f"{w:.6f}" for w in scan["omega_p"])
    np.savetxt(os.path.join(out_dir, "freq_scan_pd.csv"), pd_table,
               delimiter=",", header=pd_header, comments="")
    kb_table = np.column_stack([scan["nodes"], scan["kappa_b"].T])
    kb_header = "R_bohr," + ",".join(f"{w:.6f}" for w in scan["omega_p"])
    np.savetxt(os.path.join(out_dir, "freq_scan_kappa_b.csv"), kb_table,
               delimiter=",", header=kb_header, comments="")
    _write_json(os.path.join(out_dir, "freq_scan.json"),
                _metadata(params, {"failures": scan["failures"],
                                   "grid_hash": _grid_hash(scan["nodes"])}))


def write_coupling_scan(scan, out_dir, params):
    os.makedirs(out_dir, exist_ok=True)
    table = np.column_stack([scan["e_1ph"], scan["p_d_final"]])
    header = "e_1ph_mv_per_bohr," + ",".join(f"{w:.6f}" for w in scan["omega_p"])
    np.savetxt(os.path.join(out_dir, "coupling_scan_pd.csv"), table,
               delimiter=",", header=header, comments="")
    _write_json(os.path.join(out_dir, "coupling_scan.json"),
                _metadata(params, {"failures": scan["failures"]}))
