"""``chiral-kerr`` command-line entry point.

Exit codes: 0 success, 1 configuration error, 2 invariant or oracle
verification failure (including inconclusive oracle runs), 3 numerical abort.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

import numpy as np

from chiral_kerr import __version__, figures, oracle, validation
from chiral_kerr.config import ConfigError, load_config, parse_pairs
from chiral_kerr.model import CouplingConfig, ParameterError
from chiral_kerr.serialize import FORMATS, render, report_to_json, write_dataset
from chiral_kerr.single import WavepacketSpec
from chiral_kerr.twophoton import TwoPhotonSpec

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_FAILED = 2
EXIT_ABORT = 3

ORACLE_CHECKS = ("bare_phase", "factorized", "bound_state")
ORACLE_TOLERANCE = 2e-2


def _coupling(cfg) -> CouplingConfig:
    c = cfg["coupling"]
    return CouplingConfig.from_rates(c["gamma1"], c["gamma2"], unit=c["unit"])


def _pair_spec(cfg) -> TwoPhotonSpec:
    wp = cfg["wavepacket"]
    d2 = wp["delta"] if wp["delta2"] == "" else _as_float("wavepacket.delta2", wp["delta2"])
    e2 = wp["epsilon"] if wp["epsilon2"] == "" else _as_float("wavepacket.epsilon2", wp["epsilon2"])
    return TwoPhotonSpec(wp["delta"], wp["epsilon"], d2, e2)


def _as_float(key: str, raw) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r}") from None


def _axis(lo: float, hi: float, points: int, label: str) -> np.ndarray:
    if points < 2 or not hi > lo:
        raise ConfigError(f"{label}: need points >= 2 and max > min")
    return np.linspace(lo, hi, points)


def _emit(ds, args) -> None:
    if args.out is None:
        sys.stdout.write(render(ds, args.format))
    else:
        write_dataset(ds, args.out, args.format)


def _emit_many(datasets, args, command: str) -> None:
    if args.out is None:
        raise ConfigError(f"{command} writes one file per dataset; pass --out DIRECTORY")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for ds in datasets:
        write_dataset(ds, out / f"{ds.name}.{args.format}", args.format)


def _emit_report(report: dict, args) -> None:
    text = report_to_json(report)
    if args.out is None:
        sys.stdout.write(text)
    else:
        path = Path(args.out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")


def cmd_spectrum(cfg, args) -> int:
    s = cfg["spectrum"]
    grid = _axis(s["omega_min"], s["omega_max"], s["points"], "spectrum")
    unit = cfg["coupling"]["unit"]
    datasets = [
        figures.spectrum_dataset(CouplingConfig.from_rates(g1, g2, unit=unit), grid)
        for g1, g2 in parse_pairs(s["couplings"], "spectrum.couplings")
    ]
    _emit_many(datasets, args, "spectrum")
    return EXIT_OK


def cmd_ip_slices(cfg, args) -> int:
    s = cfg["ip_slices"]
    omega = _axis(s["omega_min"], s["omega_max"], s["points"], "ip_slices")
    cuts = parse_pairs(s["cuts"], "ip_slices.cuts")
    ds = figures.ip_slices_dataset(
        cuts, cfg["kerr"]["u"], cfg["wavepacket"]["epsilon"], omega, _coupling(cfg).total
    )
    _emit(ds, args)
    return EXIT_OK


def cmd_maps(cfg, args) -> int:
    m = cfg["maps"]
    axis = _axis(-m["extent"], m["extent"], m["points"], "maps")
    datasets = figures.maps_datasets(_pair_spec(cfg), cfg["kerr"]["u"], _coupling(cfg), axis)
    _emit_many(datasets, args, "maps")
    return EXIT_OK


def _sweep_values(s) -> np.ndarray:
    start, stop, step = s["gamma2_start"], s["gamma2_stop"], s["gamma2_step"]
    if not step > 0 or stop < start:
        raise ConfigError("gamma_sweep: need gamma2_step > 0 and gamma2_stop >= gamma2_start")
    count = int(round((stop - start) / step)) + 1
    # rounding keeps values like 0.15 free of accumulated binary noise
    return np.round(start + step * np.arange(count), 12)


def cmd_gamma_sweep(cfg, args) -> int:
    s = cfg["gamma_sweep"]
    ds = figures.gamma_sweep_dataset(
        s["case"],
        _sweep_values(s),
        u=cfg["kerr"]["u"],
        epsilon=cfg["wavepacket"]["epsilon"],
        quad_points=cfg["quadrature"]["points"],
        gamma=cfg["coupling"]["unit"],
        threads=args.threads,
    )
    _emit(ds, args)
    return EXIT_OK


def _comparison(comp: oracle.Comparison) -> dict:
    return {
        "rel_l2": comp.rel_l2,
        "max_abs": comp.max_abs,
        "points": comp.points,
        "passed": comp.passed(ORACLE_TOLERANCE),
    }


def _run_summary(run, label: str) -> dict:
    stationarity = oracle.stationarity_residual(run)
    return {
        "norm_drift": run.norm_drift,
        "long_time_ok": run.long_time_ok,
        "stationarity": stationarity,
        "stationary": stationarity < oracle.STATIONARITY_LEVEL,
        "run": label,
    }


def cmd_oracle(cfg, args) -> int:
    o = cfg["oracle"]
    checks = [c.strip() for c in str(o["checks"]).split(",") if c.strip()]
    unknown = sorted(set(checks) - set(ORACLE_CHECKS))
    if unknown or not checks:
        raise ConfigError(f"oracle.checks: unknown or empty {unknown}; choose from {ORACLE_CHECKS}")
    gamma = _coupling(cfg).total
    u = o["u"]
    single_run = oracle.OracleRunConfig(
        oracle.DiscretizedContinuum(o["cutoff"], o["modes"]), o["step"], o["t_end"]
    )
    pair_run = oracle.OracleRunConfig(
        oracle.DiscretizedContinuum(o["pair_cutoff"], o["pair_modes"]), o["step"], o["t_end"]
    )
    spec = TwoPhotonSpec.identical(o["delta"], o["epsilon"])
    results: dict[str, dict] = {}
    dump_source = None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", oracle.LongTimeWarning)
        if "bare_phase" in checks:
            run = oracle.evolve_one(WavepacketSpec(o["delta"], o["epsilon"]), gamma, single_run)
            entry = _comparison(oracle.check_bare_phase(run, gamma))
            entry["ratio_rel_l2"] = oracle.bare_phase_ratio_deviation(run, gamma)
            entry.update(_run_summary(run, "one_excitation"))
            results["bare_phase"] = entry
        if "factorized" in checks:
            run = oracle.evolve_two(spec, 0.0, gamma, pair_run)
            entry = _comparison(oracle.check_factorized(run, gamma))
            entry.update(_run_summary(run, "two_excitation_u0"))
            results["factorized"] = entry
            dump_source = (run, 0.0)
        if "bound_state" in checks:
            run = oracle.evolve_two(spec, u, gamma, pair_run)
            entry = _comparison(oracle.check_bound_state(run, spec, u, gamma))
            entry.update(_run_summary(run, "two_excitation"))
            results["bound_state"] = entry
            dump_source = (run, u)

    if o["dump"]:
        if dump_source is None:
            raise ConfigError("oracle.dump needs a two-photon check (factorized or bound_state)")
        run, dump_u = dump_source
        oracle.write_dump(
            o["dump"],
            oracle.extract_asymptotic(run.final),
            pair_run.continuum,
            {"u": dump_u, "gamma": gamma, "delta": o["delta"], "epsilon": o["epsilon"],
             "t_end": o["t_end"], "step": o["step"]},
        )

    conclusive = all(r["long_time_ok"] and r["stationary"] for r in results.values())
    if not conclusive:
        status = "inconclusive"
    elif all(r["passed"] for r in results.values()):
        status = "pass"
    else:
        status = "fail"
    report = {
        "parameters": {
            "gamma": gamma,
            "u": u,
            "delta": o["delta"],
            "epsilon": o["epsilon"],
            "step": o["step"],
            "t_end": o["t_end"],
            "cutoff": o["cutoff"],
            "modes": o["modes"],
            "pair_cutoff": o["pair_cutoff"],
            "pair_modes": o["pair_modes"],
        },
        "tolerance": ORACLE_TOLERANCE,
        "checks": results,
        "status": status,
    }
    _emit_report(report, args)
    return EXIT_OK if status == "pass" else EXIT_FAILED


def cmd_validate(cfg, args) -> int:
    seed = validation.DEFAULT_SEED if args.seed is None else args.seed
    report = validation.run_suite(seed=seed, draws=cfg["validate"]["draws"])
    _emit_report(report, args)
    return EXIT_OK if report["passed"] else EXIT_FAILED


COMMANDS = {
    "spectrum": cmd_spectrum,
    "ip-slices": cmd_ip_slices,
    "maps": cmd_maps,
    "gamma-sweep": cmd_gamma_sweep,
    "oracle": cmd_oracle,
    "validate": cmd_validate,
}


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def _threads(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("threads must be >= 1")
    return value


COMMAND_HELP = {
    "spectrum": "single-photon T, R and phases per coupling",
    "ip-slices": "|C0|^2 and |D|^2 along cuts omega' = E - omega",
    "maps": "two-photon maps over (omega, omega')",
    "gamma-sweep": "forward and reverse pair transmission against gamma2",
    "oracle": "time-domain checks against the closed forms",
    "validate": "randomized invariant suite",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="INI file; see chiral_kerr.config.DEFAULTS")
    common.add_argument(
        "--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE",
        help="override one config value (repeatable)",
    )
    common.add_argument("--out", metavar="PATH", help="output file, or directory for spectrum/maps")
    common.add_argument("--format", choices=FORMATS, default="csv")
    common.add_argument("--seed", type=_seed, default=None)
    common.add_argument("--threads", type=_threads, default=1)

    parser = argparse.ArgumentParser(prog="chiral-kerr", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=COMMAND_HELP[name])
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.overrides)
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except figures.InvariantFailure as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except oracle.OracleError as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_ABORT


if __name__ == "__main__":
    sys.exit(main())
