"""Command-line front end: ``scatter1d <subcommand> [options]``.

Exit codes: 0 success, 1 usage error, 2 computation error, 3 validation failures.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import _kernels, siegert, wavepacket
from .config import RunConfig, load_config
from .errors import Scatter1DError
from .fdsolver import sharp_peaks, transmission_scan
from .model import energy_grid
from .workflows import compare_routes, green_report, resonance_table, validation_checks, local_fd_curve

EXIT_OK, EXIT_USAGE, EXIT_COMPUTE, EXIT_VALIDATION = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def write_csv(path, header, columns):
    data = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        np.savetxt(fh, data, fmt="%.17g", delimiter=",")


def read_curve(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or "E" not in rows[0] or "T2" not in rows[0]:
        raise UsageError(f"{path}: expected a scan CSV with E and T2 columns")
    return np.array([float(r["E"]) for r in rows]), np.array([float(r["T2"]) for r in rows])


def _json(obj):
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(type(obj))


def dump_json(obj, path=None):
    text = json.dumps(obj, indent=2, default=_json)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


# subcommands ------------------------------------------------------------------

def cmd_scan(cfg: RunConfig, args):
    pot = cfg.potential()
    E = energy_grid(cfg.scan_emin, cfg.scan_emax, cfg.scan_n)
    r = transmission_scan(pot, E, cfg.fd_dx, cfg.constants, cfg.pad)
    write_csv(args.out, ["E", "ReT", "ImT", "ReR", "ImR", "T2", "R2", "unitarity_residual"],
              [r.E, r.T.real, r.T.imag, r.R.real, r.R.imag, r.T2, r.R2, r.unitarity_residual])
    if args.peaks:
        for pk in sharp_peaks(pot, r, cfg.fd_dx, cfg.constants):
            print(f"peak E={pk.E:.10g} T2={pk.T2:.6g} fwhm={pk.fwhm:.6g}")
    return EXIT_OK


def cmd_siegert(cfg: RunConfig, args):
    spec = siegert.siegert_spectrum(cfg.potential(), cfg.siegert_n, cfg.siegert_a, cfg.siegert_basis,
                                    cfg.constants, cfg.siegert_range_tolerance)
    d = spec.to_dict()
    d["potential"] = cfg.potential_name
    dump_json(d, args.out)
    return EXIT_OK


def cmd_resonances(cfg: RunConfig, args):
    with open(args.spectrum) as fh:
        spec = siegert.SiegertSpectrum.from_dict(json.load(fh))
    fe, ft = read_curve(args.fd_curve)
    pot = cfg.potential() if args.local_scan else None
    cls = siegert.classify_spectrum(spec)
    rows = []
    for i in cls.resonances:
        E = spec.E[i]
        G = -2 * E.imag
        if not (fe.min() <= E.real <= fe.max()) or G > args.max_gamma:
            continue
        ce, ct = fe, ft
        if pot is not None:
            ce, ct = local_fd_curve(pot, E.real, G, cfg.fd_dx, cfg.constants)
        try:
            rec = siegert.breit_wigner_report(spec, ce, ct, int(i))
            rows.append([rec.E_res, rec.Gamma, rec.k.real, rec.k.imag, rec.Q, rec.fit_rms, 1])
        except Scatter1DError:
            rows.append([E.real, G, spec.k[i].real, spec.k[i].imag,
                         siegert.breit_wigner_q(spec, int(i)), np.nan, 0])
    cols = np.array(rows).T if rows else [[]] * 7
    write_csv(args.out, ["E_res", "Gamma", "Rek", "Imk", "Q", "fit_rms", "window_resolved"], cols)
    return EXIT_OK


def cmd_compare(cfg: RunConfig, args):
    E = energy_grid(cfg.scan_emin, cfg.scan_emax, cfg.compare_n)
    cmp = compare_routes(cfg.potential(), E, cfg.siegert_n, cfg.siegert_a, cfg.siegert_basis, cfg.fd_dx,
                         cfg.constants, cfg.siegert_range_tolerance)
    write_csv(args.out, ["E", "ReT_fd", "ImT_fd", "ReT_siegert", "ImT_siegert", "abs_diff"],
              [cmp.E, cmp.T_fd.real, cmp.T_fd.imag, cmp.T_siegert.real, cmp.T_siegert.imag, cmp.diff])
    summary = cmp.summary() | {"N": cfg.siegert_n, "a": cfg.siegert_a, "basis": cfg.siegert_basis}
    dump_json(summary, args.report)
    return EXIT_OK


def cmd_green_check(cfg: RunConfig, args):
    spec = None
    if not args.no_siegert:
        spec = siegert.siegert_spectrum(cfg.potential(), cfg.siegert_n, cfg.siegert_a, cfg.siegert_basis,
                                        cfg.constants, cfg.siegert_range_tolerance)
    dump_json(green_report(cfg.potential(), args.energy, cfg.fd_dx, cfg.constants, spec), args.out)
    return EXIT_OK


def cmd_wavepacket(cfg: RunConfig, args):
    pot = cfg.potential()
    c = cfg.constants
    ref = wavepacket.resonance_refinement(pot, cfg.wavepacket_k0, cfg.wavepacket_sigma,
                                          cfg.wavepacket_nodes, cfg.fd_dx, c)
    pk = wavepacket.gaussian_packet(cfg.wavepacket_k0, cfg.wavepacket_sigma, cfg.wavepacket_nodes, ref)
    st = wavepacket.stationary_states(pk, pot, cfg.fd_dx, c)
    x = np.arange(cfg.wavepacket_xmin, cfg.wavepacket_xmax + 0.5 * cfg.wavepacket_xstep, cfg.wavepacket_xstep)
    cols = [[], [], [], [], []]
    norms = {}
    for t in cfg.times():
        psi = wavepacket.propagate(pk, st, t, x, c)
        for col, v in zip(cols, (np.full(x.size, t), x, psi.real, psi.imag, np.abs(psi) ** 2)):
            col.append(v)
        norms[f"{t:g}"] = wavepacket.norm(psi, x)
    write_csv(args.out, ["t", "x", "Re_psi", "Im_psi", "abs_psi2"], [np.concatenate(c_) for c_ in cols])
    pt, pr = wavepacket.branch_populations(pk, st.T, st.R)
    dump_json({"k0": pk.k0, "sigma_k": pk.sigma_k, "nodes": int(pk.k.size),
               "refined_at": [list(r) for r in ref], "p_trans": pt, "p_refl": pr,
               "sum": pt + pr, "norm_by_time": norms}, args.report)
    return EXIT_OK


def cmd_validate(cfg: RunConfig, args):
    checks = validation_checks(cfg)
    for ch in checks:
        print(ch.line())
    failed = sum(not ch.ok for ch in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_VALIDATION if failed else EXIT_OK


# argument parsing ----------------------------------------------------------------

def _common(p):
    p.add_argument("--config", help="flat key = value configuration file")
    p.add_argument("--potential", dest="potential_name", help="jolanta, zero, square, stepwell or table")
    p.add_argument("--table", dest="potential_table", help="CSV with x,V columns for --potential table")
    p.add_argument("--scale", dest="potential_scale", type=float, help="multiply the potential")
    p.add_argument("--range-threshold", dest="potential_range_threshold", type=float)
    p.add_argument("--hbar", type=float)
    p.add_argument("--mass", type=float)
    p.add_argument("--dx", dest="fd_dx", type=float)
    p.add_argument("--pad", dest="fd_pad", type=float)
    p.add_argument("--threads", type=int)


def _grid(p, n_dest="scan_n", n_flag="--n"):
    p.add_argument("--emin", dest="scan_emin", type=float)
    p.add_argument("--emax", dest="scan_emax", type=float)
    p.add_argument(n_flag, dest=n_dest, type=int, help="number of energies")


def _siegert(p, with_n=True):
    if with_n:
        p.add_argument("--n", dest="siegert_n", type=int)
    p.add_argument("--box-a", dest="siegert_a", type=float)
    p.add_argument("--basis", dest="siegert_basis", choices=["legendre", "fourier"])
    p.add_argument("--box-tolerance", dest="siegert_range_tolerance", type=float)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="scatter1d", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("scan", help="FD transmission curve")
    _common(p); _grid(p)
    p.add_argument("--out", required=True)
    p.add_argument("--peaks", action="store_true", help="print the sharp |T|^2 peaks")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("siegert", help="Siegert pseudostate spectrum as JSON")
    _common(p); _siegert(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_siegert)

    p = sub.add_parser("resonances", help="Breit-Wigner table from a spectrum and an FD curve")
    _common(p)
    p.add_argument("--spectrum", required=True)
    p.add_argument("--fd-curve", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--max-gamma", type=float, default=0.1)
    p.add_argument("--local-scan", action="store_true",
                   help="resolve each peak with a dense FD scan of the configured potential")
    p.set_defaults(func=cmd_resonances)

    p = sub.add_parser("compare", help="FD and Siegert transmission on one grid")
    _common(p); _siegert(p); _grid(p, "compare_n", "--points")
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("green-check", help="Green-function identity residuals as JSON")
    _common(p); _siegert(p)
    p.add_argument("--energy", type=float, default=0.5)
    p.add_argument("--no-siegert", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_green_check)

    p = sub.add_parser("wavepacket", help="spectral wavepacket samples and populations")
    _common(p)
    p.add_argument("--k0", dest="wavepacket_k0", type=float)
    p.add_argument("--sigma", dest="wavepacket_sigma", type=float)
    p.add_argument("--nodes", dest="wavepacket_nodes", type=int)
    p.add_argument("--times", dest="wavepacket_times")
    p.add_argument("--xmin", dest="wavepacket_xmin", type=float)
    p.add_argument("--xmax", dest="wavepacket_xmax", type=float)
    p.add_argument("--xstep", dest="wavepacket_xstep", type=float)
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.set_defaults(func=cmd_wavepacket)

    p = sub.add_parser("validate", help="run the invariant suite")
    _common(p); _siegert(p); _grid(p, "compare_n", "--points")
    p.set_defaults(func=cmd_validate)
    return ap


_NOT_CONFIG = {"config", "func", "command", "out", "report", "peaks", "spectrum", "fd_curve",
               "max_gamma", "local_scan", "energy", "no_siegert"}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "func", None):
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        overrides = {k: v for k, v in vars(args).items() if k not in _NOT_CONFIG and v is not None}
        cfg = load_config(args.config, overrides)
        _kernels.set_threads(cfg.threads or None)
    except (OSError, KeyError, ValueError) as exc:
        print(f"scatter1d: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(cfg, args)
    except UsageError as exc:
        print(f"scatter1d: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (Scatter1DError, np.linalg.LinAlgError, ArithmeticError, LookupError, ValueError) as exc:
        print(f"scatter1d: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except OSError as exc:
        print(f"scatter1d: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
