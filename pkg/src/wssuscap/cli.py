"""Command-line front end.

    wssuscap sweep --preset fig1 --out fig1.csv
    wssuscap wideband --set scenario.nu_max=500 --set power.p=1 ...
    wssuscap validate --level fast

Exit codes: 0 ok, 1 configuration error, 2 numerical failure, 3 validation
failure. WSSUS_WORKERS and WSSUS_SEED set the default worker count and seed.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import bounds, channel_sim, pulse_design, validate
from .config import ConfigError, Scenario, verify_presets
from .mi_kernel import MIError
from .scattering import CorrelationSeq, ScatteringError
from .spectral import SpectralError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VALIDATION = 0, 1, 2, 3
CSV_COLUMNS = ("bandwidth_hz", "effective_bandwidth_hz", "ucoh", "u1", "alpha_star",
               "l1", "l1cf", "l1approx", "l1a")

# flag name -> config key
FLAG_KEYS = {
    "shape": "scenario.shape", "nu_max": "scenario.nu_max", "tau_max": "scenario.tau_max",
    "doppler_profile": "scenario.doppler_profile", "delay_profile": "scenario.delay_profile",
    "table_file": "scenario.table_file", "T": "grid.t", "F": "grid.f",
    "tf_product": "grid.tf_product", "P": "power.p", "kappa": "power.kappa",
    "b_min": "sweep.b_min", "b_max": "sweep.b_max", "points": "sweep.points",
    "bounds": "sweep.bounds",
}


def fmt(x):
    if x is None or (isinstance(x, float) and np.isnan(x)):
        return ""
    return f"{x:.12g}"


def load_scenario(args):
    sc = Scenario.load(args.preset, args.config, args.set or ())
    if getattr(args, "grid_auto", False):
        sc.values.pop("grid.t", None)
        sc.values.pop("grid.f", None)
    for flag, key in FLAG_KEYS.items():
        sc.set(key, getattr(args, flag, None))
    return sc


def write_out(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def sweep_csv(sc, curve, bits=False):
    scale = 1 / np.log(2) if bits else 1.0
    lines = [f"# {h}" for h in sc.header_lines()]
    lines.append(f"# slot_rule = {curve.meta['slot_rule']}")
    lines.append(f"# units = {'bit/s' if bits else 'nat/s'}")
    flags = sorted({f for p in curve.points for f in p.flags})
    lines.append(f"# flags = {','.join(flags)}")
    lines.append(",".join(CSV_COLUMNS))
    for p in curve.points:
        row = [p.B, p.B_eff]
        for col in CSV_COLUMNS[2:]:
            if col == "alpha_star":
                row.append(None if "u1" not in p.values else p.alpha_star)
            else:
                v = p.values.get(col)
                row.append(None if v is None else v * scale)
        lines.append(",".join(fmt(x) for x in row))
    return "\n".join(lines) + "\n"


def plot_script(csv_path):
    return "\n".join([
        "set datafile separator ','",
        "set logscale x",
        "set xlabel 'bandwidth [Hz]'",
        "set ylabel 'rate [nat/s]'",
        "set key bottom right",
        f"plot for [c in '3 4 6 7'] '{csv_path}' using 2:(column(int(c))) "
        "with lines title columnhead(int(c))",
        ""])


def cmd_sweep(args):
    sc = load_scenario(args)
    req = sc.request()
    curve = bounds.sweep(req, workers=args.workers)
    write_out(sweep_csv(sc, curve, args.bits), args.out)
    if args.plot_script:
        write_out(plot_script(args.out or "sweep.csv"), args.plot_script)
    return EXIT_OK


def cmd_wideband(args):
    sc = load_scenario(args)
    sf = sc.scattering()
    grid, power = sc.grid(sf), sc.power()
    tc = bounds.kappa1(power, sf, grid)
    report = {"kappa1": tc.kappa1, "kappa1_lb": tc.kappa1_lb, "sigma": tc.sigma,
              "regime": "peaky" if tc.peaky_regime else "flat", "ratio": tc.ratio,
              "tf": grid.tf, "spread": sf.spread}
    write_out(_kv(report), args.out)
    return EXIT_OK


def cmd_infbw(args):
    sc = load_scenario(args)
    sf = sc.scattering()
    power = sc.power()
    lb, ub = bounds.cinf_lb(power, sf), bounds.cinf_ub(power, sf)
    gap = ub - lb
    exact = sf.separable and sf.delay.is_flat
    report = {"cinf_lb": lb, "cinf_ub": ub, "F": 1 / (2 * sf.tau_max), "gap": gap,
              "exact": "true" if exact else "false"}
    write_out(_kv(report), args.out)
    return EXIT_OK


def cmd_pulse_report(args):
    sc = load_scenario(args)
    sf = sc.scattering()
    grid = sc.grid(sf)
    pulse = pulse_design.Pulse.matched(grid)
    e1 = pulse_design.eigenfunction_error_e1(sf, pulse)
    e2 = pulse_design.eigenvalue_error_e2(sf, pulse)
    e4, tail = pulse_design.isi_ici_bound_e4(sf, pulse, grid, args.radius)
    lines = ["# matched Gaussian scale s = sqrt(T/F)",
             "quantity,value", f"T,{fmt(grid.T)}", f"F,{fmt(grid.F)}",
             f"scale,{fmt(pulse.scale)}", f"e1,{fmt(e1)}", f"e2,{fmt(e2)}",
             f"e4,{fmt(e4)}", f"e4_tail,{fmt(tail)}", "",
             "ratio_t_over_f,e4,e4_tail"]
    q0 = sf.tau_max / sf.nu_max
    for q, v, t in pulse_design.grid_ratio_sweep(sf, grid.tf, q0 * np.logspace(-1, 1, args.ratios),
                                                 args.radius):
        lines.append(f"{fmt(q)},{fmt(v)},{fmt(t)}")
    write_out("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_simulate(args):
    sc = load_scenario(args)
    sf = sc.scattering()
    grid = sc.grid(sf)
    K, Fs = sc.get("sim.k", cast=int), sc.get("sim.f_slots", cast=int)
    count = sc.get("sim.count", cast=int)
    seed = args.seed if args.seed is not None else sc.get("sim.seed", cast=int)
    reals = channel_sim.generate(sf, grid, K, Fs, count, seed)
    corr = CorrelationSeq(sf, grid)
    lines = [f"# seed = {seed}", f"# count = {count}", "n,m,empirical_re,empirical_im,stderr,"
             "closed_re,closed_im,z"]
    worst = 0.0
    for n in range(min(K, 3)):
        for m in range(min(Fs, 3)):
            v, se = channel_sim.empirical_correlation(reals, n, m)
            c = complex(corr(n, m))
            z = abs(v - c) / se if se > 0 else 0.0
            worst = max(worst, z)
            lines.append(",".join([str(n), str(m), fmt(v.real), fmt(v.imag), fmt(se),
                                   fmt(c.real), fmt(c.imag), fmt(z)]))
    write_out("\n".join(lines) + "\n", args.out)
    if args.dump:
        os.makedirs(args.dump, exist_ok=True)
        for r in reals[:args.dump_count]:
            channel_sim.write_realization(os.path.join(args.dump, f"h_{r.index:05d}.txt"), r,
                                          sf.nu_max, sf.tau_max)
    return EXIT_OK


def cmd_validate(args):
    results = validate.run(args.level)
    ok = all(r["ok"] for r in results)
    json.dump({"level": args.level, "passed": ok, "checks": results}, sys.stdout, indent=1)
    sys.stdout.write("\n")
    return EXIT_OK if ok else EXIT_VALIDATION


def _kv(d):
    return "".join(f"{k} = {fmt(v) if isinstance(v, float) else v}\n" for k, v in d.items())


def build_parser():
    env_workers = int(os.environ.get("WSSUS_WORKERS", "1"))
    env_seed = os.environ.get("WSSUS_SEED")
    ap = argparse.ArgumentParser(prog="wssuscap", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def scenario_args(p):
        p.add_argument("--preset")
        p.add_argument("--config", help="INI file with [scenario] [grid] [power] [sweep] [sim]")
        p.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE")
        p.add_argument("--shape")
        p.add_argument("--nu-max", dest="nu_max", type=float)
        p.add_argument("--tau-max", dest="tau_max", type=float)
        p.add_argument("--doppler-profile", dest="doppler_profile")
        p.add_argument("--delay-profile", dest="delay_profile")
        p.add_argument("--table-file", dest="table_file")
        p.add_argument("--T", type=float)
        p.add_argument("--F", type=float)
        p.add_argument("--tf-product", dest="tf_product", type=float)
        p.add_argument("--grid-auto", action="store_true",
                       help="ignore explicit T/F and derive the grid from tf_product")
        p.add_argument("--P", type=float)
        p.add_argument("--kappa", type=float)
        p.add_argument("--out", "-o")

    p = sub.add_parser("sweep", help="bounds versus bandwidth as CSV")
    scenario_args(p)
    p.add_argument("--b-min", dest="b_min", type=float)
    p.add_argument("--b-max", dest="b_max", type=float)
    p.add_argument("--points", type=int)
    p.add_argument("--bounds")
    p.add_argument("--bits", action="store_true", help="report rates in bit/s")
    p.add_argument("--workers", type=int, default=env_workers)
    p.add_argument("--plot-script", dest="plot_script")
    p.set_defaults(func=cmd_sweep)

    for name, func, text in [("wideband", cmd_wideband, "first-order wideband coefficients"),
                             ("infbw", cmd_infbw, "infinite-bandwidth bounds")]:
        p = sub.add_parser(name, help=text)
        scenario_args(p)
        p.set_defaults(func=func)

    p = sub.add_parser("pulse-report", help="e1, e2, e4 and the grid-ratio sweep")
    scenario_args(p)
    p.add_argument("--radius", type=int, default=5)
    p.add_argument("--ratios", type=int, default=21)
    p.set_defaults(func=cmd_pulse_report)

    p = sub.add_parser("simulate", help="Monte-Carlo channel statistics")
    scenario_args(p)
    p.add_argument("--seed", type=int, default=None if env_seed is None else int(env_seed))
    p.add_argument("--dump", help="directory for realization files")
    p.add_argument("--dump-count", dest="dump_count", type=int, default=10)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate", help="run the self-check suites")
    p.add_argument("--level", choices=("fast", "full"), default="fast")
    p.set_defaults(func=cmd_validate)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        verify_presets()
        return args.func(args)
    except (ConfigError, ScatteringError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, SpectralError, MIError, channel_sim.SimulationError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
