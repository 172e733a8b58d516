"""Command-line front end.

Subcommands: run, scan-freq, scan-coupling, popes (polaritonic curves),
spectral-density, fit-sat. Exit codes: 0 success, 2 configuration error,
3 numerical-integrity error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .errors import (ConvergenceError, CoverageError, DataConsistencyError,
                     FitQualityError, FormatError, IntegrityError,
                     ParameterError, PhysicsError, StiffnessError)
from .experiments import (ExperimentConfig, fit_saturation, run_single,
                          scan_coupling, scan_frequency, write_coupling_scan,
                          write_frequency_scan)
from .units import HARTREE_EV

_CONFIG_ERRORS = (ParameterError, FormatError, CoverageError,
                  DataConsistencyError, FileNotFoundError, OSError)
_NUMERICAL_ERRORS = (ConvergenceError, StiffnessError, IntegrityError,
                     FitQualityError, PhysicsError)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="plasmodis",
        description="Plasmon-assisted molecular photodissociation simulations",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("run", "propagate a single trajectory"),
        ("scan-freq", "frequency scan: P_D(t; omega_p) and kappa_B*(R; omega_p)"),
        ("scan-coupling", "coupling scan: P_D(t_f; E_1ph, omega_p)"),
        ("popes", "R-resolved polaritonic complex eigenvalues"),
        ("spectral-density", "nanosphere spectral density and pseudomode fit"),
        ("fit-sat", "fit an exponential saturation curve to a P_D series"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", help="config file (sectioned key=value)")
        cmd.add_argument("--out", help="output directory")
        cmd.add_argument("--omega-p", type=float, help="mode frequency (eV)")
        cmd.add_argument("--e1ph", type=float, help="single-photon field (mV/bohr)")
        cmd.add_argument("--kappa", type=float, help="mode decay rate (eV)")
        cmd.add_argument("--t-final", type=float, help="propagation time (fs)")
        cmd.add_argument("--threads", type=int, help="scan worker processes")
        cmd.add_argument("--print-config", action="store_true",
                         help="print the effective config with value sources and exit")
        if name == "fit-sat":
            cmd.add_argument("series", nargs="?",
                             help="CSV with time_fs and P_D columns "
                                  "(trajectory.csv output works directly)")
            cmd.add_argument("--window-start", type=float,
                             help="fit-window start time (fs)")
    return parser


def _load_config(args):
    if args.config:
        config = ExperimentConfig.from_file(args.config)
    else:
        config = ExperimentConfig()
    return config.with_overrides(
        omega_p=args.omega_p, e_1ph=args.e1ph, kappa=args.kappa,
        t_final=args.t_final, threads=args.threads, out_dir=args.out,
    )


def _cmd_run(config, args):
    record = run_single(config)
    print(json.dumps(record.summary(), indent=2))
    return 0


def _cmd_scan_freq(config, args):
    scan = scan_frequency(config)
    out = config.out_dir or "."
    write_frequency_scan(scan, out, config.as_dict())
    final = scan["p_d"][:, -1]
    for w, p in zip(scan["omega_p"], final):
        print(f"omega_p = {w:7.3f} eV   P_D({scan['times'][-1]:g} fs) = {p:.6f}")
    if scan["failures"]:
        print(f"{len(scan['failures'])} point(s) failed; see freq_scan.json",
              file=sys.stderr)
    return 0


def _cmd_scan_coupling(config, args):
    scan = scan_coupling(config)
    out = config.out_dir or "."
    write_coupling_scan(scan, out, config.as_dict())
    print(f"wrote {len(scan['e_1ph'])} x {len(scan['omega_p'])} map to "
          f"{os.path.join(out, 'coupling_scan_pd.csv')}")
    if scan["failures"]:
        print(f"{len(scan['failures'])} point(s) failed; see coupling_scan.json",
              file=sys.stderr)
    return 0


def _cmd_popes(config, args):
    from .system import assemble, polaritonic_curves
    grid = config.build_grid()
    model = config.build_molecule(grid)
    mode = config.build_mode()
    ops = assemble(model, mode, config.cap_config())
    curves = polaritonic_curves(ops)
    table = np.column_stack([
        curves.r,
        curves.energies[:, 0].real * HARTREE_EV,
        curves.energies[:, 0].imag * HARTREE_EV,
        curves.energies[:, 1].real * HARTREE_EV,
        curves.energies[:, 1].imag * HARTREE_EV,
        curves.weight_x1,
    ])
    header = ("R_bohr,ReE_branch1_eV,ImE_branch1_eV,ReE_branch2_eV,"
              "ImE_branch2_eV,weight_X1_branch1,weight_X1_branch2")
    if config.out_dir:
        os.makedirs(config.out_dir, exist_ok=True)
        path = os.path.join(config.out_dir, "popes.csv")
        np.savetxt(path, table, delimiter=",", header=header, comments="")
        print(f"wrote {path}")
    else:
        np.savetxt(sys.stdout, table, delimiter=",", header=header, comments="")
    return 0


def _cmd_spectral_density(config, args):
    from .plasmon import DrudeMetal, SphereEmitterGeometry, fit_pseudomode, spectral_density
    metal = DrudeMetal(config.plasma_frequency, config.damping_rate)
    geom = SphereEmitterGeometry(config.radius, config.background_index,
                                 config.emitter_distance, config.orientation)
    omega = np.linspace(config.omega_lo, config.omega_hi, config.n_omega)
    spectrum = spectral_density(metal, geom, omega)
    mode = fit_pseudomode(spectrum)
    if config.out_dir:
        os.makedirs(config.out_dir, exist_ok=True)
        path = os.path.join(config.out_dir, "spectral_density.csv")
        np.savetxt(path, spectrum, delimiter=",",
                   header="omega_eV,J_per_mu2_eV_per_ebohr2", comments="")
        print(f"wrote {path}")
    print(json.dumps({
        "omega_p_eV": mode.omega_p, "kappa_eV": mode.kappa,
        "E_1ph_mV_per_bohr": mode.e_1ph, "fit_residual": mode.fit_residual,
        "lifetime_fs": mode.tau_fs, "mode_volume_nm3": mode.mode_volume_nm3,
    }, indent=2))
    return 0


def _cmd_fit_sat(config, args):
    if not args.series:
        raise ParameterError("fit-sat needs a CSV series file argument")
    data = np.genfromtxt(args.series, delimiter=",", names=True)
    names = data.dtype.names
    if names is None or "time_fs" not in names:
        raise FormatError(f"{args.series}: need a header with a time_fs column")
    times = data["time_fs"]
    if "P_D" in names:
        p_d = data["P_D"]
    else:
        pd_cols = [n for n in names if n.startswith("P_D_")]
        if not pd_cols:
            raise FormatError(f"{args.series}: no P_D or P_D_* columns found")
        p_d = np.sum([data[n] for n in pd_cols], axis=0)
    p_inf, rate, residual = fit_saturation(times, p_d,
                                           window_start=args.window_start)
    print(json.dumps({"P_limit": p_inf, "rate_per_fs": rate,
                      "residual": residual}, indent=2))
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "scan-freq": _cmd_scan_freq,
    "scan-coupling": _cmd_scan_coupling,
    "popes": _cmd_popes,
    "spectral-density": _cmd_spectral_density,
    "fit-sat": _cmd_fit_sat,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = _load_config(args)
        if args.print_config:
            for line in config.print_lines():
                print(line)
            return 0
        return _COMMANDS[args.command](config, args)
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    except _CONFIG_ERRORS as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
