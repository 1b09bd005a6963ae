"""Batch experiment runner: argument parsing, persistence, figure-data sweeps.

Commands
--------
synth        synthesize receiver pulses for one target and write them out
run          execute a command described by a key=value config file
tmin-scan    minimal protocol times across mode counts (and a delta grid)
noise-sweep  ensemble fidelity under pulse noise over (epsilon, omega)
loss-sweep   simulated vs analytic fidelity under circulator/channel loss
oracle-check discretized-waveguide cross-check of the cascaded propagator

All numeric CSV payloads are written with 17 significant digits, so reruns
with the same config and seed are byte-identical, and pulse tables reload
to the exact float64 values. Writes are atomic (temp file then rename).
Exit codes: 0 success, 1 usage or config error, 2 quality threshold missed.
"""

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .errors import (SynthesisError, ThresholdUnreachableError,
                     UnderResolvedError, UnsupportedDimensionError)
from .grid import make_time_grid
from .metrics import analytic_loss_fidelity, process_fidelity
from .network import NetworkConfig, propagate_green
from .noise import NoiseParams, ensemble_fidelity
from .pulses import EmitterParams, PulseSet, emitter_pulses
from .synth import synthesize, trim_window
from .unitaries import check_unitary, haar_random_unitary, named_unitary
from .waveguide import WaveguideModel, compare_to_cascaded, simulate_waveguide

OUT_DIR_ENV = "BOSONCAST_OUT_DIR"
FMT = "%.17g"
_COMMANDS = ("synth", "tmin-scan", "noise-sweep", "loss-sweep", "oracle-check")


# ---------------------------------------------------------------------------
# serialization

def _atomic_write(path, text):
    tmp = f"{path}.tmp-{os.getpid()}"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _fmt(x):
    return FMT % float(x)


def save_pulses_csv(path, pulses):
    """Pulse table: t, gA1_re, gA1_im, ..., gBN_re, gBN_im; one row per node."""
    n = pulses.n_registers
    cols = ["t"]
    for reg, count in (("A", n), ("B", n)):
        for j in range(1, count + 1):
            cols += [f"g{reg}{j}_re", f"g{reg}{j}_im"]
    lines = [",".join(cols)]
    t = pulses.grid.times()
    for k in range(pulses.grid.n_nodes):
        row = [_fmt(t[k])]
        for mode in range(2 * n):
            row += [_fmt(pulses.samples[mode, k].real),
                    _fmt(pulses.samples[mode, k].imag)]
        lines.append(",".join(row))
    _atomic_write(path, "\n".join(lines) + "\n")


def load_pulses_csv(path):
    """Reload a pulse table written by save_pulses_csv."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    t = data[:, 0]
    if len(t) < 2:
        raise ValueError(f"pulse table {path!r} has fewer than two rows")
    dt = t[1] - t[0]
    grid = make_time_grid(t[0], t[-1], dt)
    if grid.n_nodes != len(t):
        raise ValueError(f"pulse table {path!r} is not on a uniform grid")
    n2 = (data.shape[1] - 1) // 2
    samples = data[:, 1::2].T + 1j * data[:, 2::2].T
    if samples.shape[0] != n2:
        raise ValueError(f"pulse table {path!r} has a malformed header")
    return PulseSet(grid=grid, samples=samples)


def save_trace_csv(path, series):
    """Long-form trace table: t, series, value."""
    lines = ["t,series,value"]
    for name, times, values in series:
        for t, v in zip(times, values):
            lines.append(f"{_fmt(t)},{name},{_fmt(v)}")
    _atomic_write(path, "\n".join(lines) + "\n")


def save_result_json(path, command, config, outputs, artifacts, elapsed):
    record = {
        "command": command,
        "config": config,
        "outputs": outputs,
        "artifacts": artifacts,
        "tool_version": __version__,
        "wall_time_s": elapsed,
    }
    _atomic_write(path, json.dumps(record, indent=2, sort_keys=True) + "\n")


def load_unitary_file(path):
    """Unitary from a CSV of complex entries (python literals, e.g. 0.5+0.5j)."""
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            rows.append([complex(tok.strip().replace("i", "j"))
                         for tok in line.split(",")])
    return check_unitary(np.array(rows, dtype=complex))


def parse_config_file(path):
    """Flat key = value config document with typed scalars and lists."""
    out = {}
    with open(path) as fh:
        for ln, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{ln}: expected 'key = value'")
            key, _, value = line.partition("=")
            out[key.strip().replace("-", "_")] = _parse_scalar_or_list(
                value.strip())
    return out


def _parse_scalar_or_list(text):
    if "," in text:
        return [_parse_scalar_or_list(tok.strip()) for tok in text.split(",")]
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


# ---------------------------------------------------------------------------
# shared experiment plumbing

def _resolve_unitary(args):
    if getattr(args, "unitary_file", None):
        u = load_unitary_file(args.unitary_file)
        return u, f"file:{args.unitary_file}", u.shape[0]
    kind = args.unitary
    n = args.n
    if kind == "haar":
        return haar_random_unitary(n, args.seed), f"haar(seed={args.seed})", n
    return named_unitary(kind, n), kind, n


def _resolve_out_dir(args):
    out = args.out_dir or os.environ.get(OUT_DIR_ENV) or "."
    os.makedirs(out, exist_ok=True)
    return out


def _detunings(args, n):
    if args.detunings is None:
        return np.zeros(2 * n)
    vals = [float(x) for x in args.detunings.split(",")]
    if len(vals) != 2 * n:
        raise ValueError(f"--detunings needs 2N = {2 * n} values, got {len(vals)}")
    return np.array(vals)


def _base_config(args, n, tf=None):
    grid = make_time_grid(0.0, tf if tf is not None else args.tf, args.dt)
    return NetworkConfig(n=n, grid=grid, detunings=_detunings(args, n),
                         local_decay=args.gamma, p_channel=args.p_ch,
                         p_circulator=args.p_circ)


def _emitter_params(args, tf):
    t_c = args.t_c if args.t_c is not None else 0.5 * tf
    return EmitterParams(delta=args.delta, tau=args.tau, t_c=t_c)


def _echo_config(args, extra=None):
    echo = {k: v for k, v in sorted(vars(args).items())
            if k not in ("func", "config") and v is not None}
    if extra:
        echo.update(extra)
    return echo


# ---------------------------------------------------------------------------
# commands

def cmd_synth(args):
    t_start = time.time()
    target, label, n = _resolve_unitary(args)
    cfg = _base_config(args, n)
    params = _emitter_params(args, cfg.grid.tf)
    emitter = emitter_pulses(n, params, cfg.grid)
    report = synthesize(cfg, target, emitter, method=args.method)
    out = _resolve_out_dir(args)
    pulses_path = os.path.join(out, "pulses.csv")
    traces_path = os.path.join(out, "traces.csv")
    result_path = os.path.join(out, "result.json")
    save_pulses_csv(pulses_path, report.pulses_b)
    t = report.times
    series = [("fidelity", t, report.fidelity_trace)]
    for lb in range(n):
        series.append((f"dark_residual_{lb + 1}", t, report.dark_residual[lb]))
        series.append((f"excitation_{lb + 1}", t, report.excitation[lb]))
    save_trace_csv(traces_path, series)
    outputs = {
        "fidelity": report.fidelity,
        "conservation_defect": report.conservation_defect,
        "dark_residual_relative": report.dark_residual_relative.tolist(),
        "phases": report.phases.tolist(),
        "warnings": report.warnings,
    }
    save_result_json(result_path, "synth",
                     _echo_config(args, {"unitary_label": label,
                                         "t_c": params.t_c}),
                     outputs, [pulses_path, traces_path],
                     time.time() - t_start)
    print(f"fidelity(tf) = {report.fidelity:.6f} -> {result_path}")
    return 0 if report.fidelity >= args.threshold else 2


def cmd_tmin_scan(args):
    t_start = time.time()
    n_list = [int(x) for x in args.n_list.split(",") if x.strip()]
    if not n_list:
        raise ValueError("empty N list")
    families = [f.strip() for f in args.families.split(",") if f.strip()]
    deltas = ([float(x) for x in args.delta_grid.split(",")]
              if args.delta_grid else [args.delta])
    rows = []
    for n in sorted(n_list):
        for family in families:
            if family == "haar":
                target = haar_random_unitary(n, args.seed)
            else:
                target = named_unitary(family, n)
            best = None
            for delta in deltas:
                cfg = _base_config(args, n, tf=max(args.dt * 4, 1.0))
                params = EmitterParams(delta=delta, tau=args.tau, t_c=args.t_c)
                try:
                    t0, tf, rep = trim_window(cfg, target, params,
                                              threshold=args.threshold,
                                              initial_tf=args.initial_tf,
                                              method=args.method)
                    row = dict(n=n, family=family, delta=delta,
                               t_min=tf - t0, fidelity=rep.fidelity,
                               status="ok")
                except ThresholdUnreachableError:
                    row = dict(n=n, family=family, delta=delta,
                               t_min=float("nan"), fidelity=float("nan"),
                               status="threshold-unreachable")
                rows.append(row)
                if row["status"] == "ok" and (best is None
                                              or row["t_min"] < best["t_min"]):
                    best = row
            if len(deltas) > 1 and best is not None:
                best["minimizer"] = True
    out = _resolve_out_dir(args)
    path = os.path.join(out, "scaling.csv")
    lines = ["n,family,delta,t_min,fidelity,status,minimizer"]
    for r in sorted(rows, key=lambda r: (r["n"], r["family"], r["delta"])):
        lines.append(",".join([str(r["n"]), r["family"], _fmt(r["delta"]),
                               _fmt(r["t_min"]), _fmt(r["fidelity"]),
                               r["status"],
                               "1" if r.get("minimizer") else "0"]))
    _atomic_write(path, "\n".join(lines) + "\n")
    save_result_json(os.path.join(out, "result.json"), "tmin-scan",
                     _echo_config(args),
                     {"rows": len(rows)}, [path], time.time() - t_start)
    print(f"{len(rows)} scan rows -> {path}")
    return 0


def _synthesized_pulses(args, target, n):
    cfg = _base_config(args, n)
    params = _emitter_params(args, cfg.grid.tf)
    emitter = emitter_pulses(n, params, cfg.grid)
    report = synthesize(cfg, target, emitter, method=args.method)
    return cfg, report


def cmd_noise_sweep(args):
    t_start = time.time()
    target, label, n = _resolve_unitary(args)
    if args.pulses_file:
        pulses = load_pulses_csv(args.pulses_file)
        cfg = NetworkConfig(n=pulses.n_registers, grid=pulses.grid,
                            detunings=_detunings(args, pulses.n_registers),
                            local_decay=args.gamma, p_channel=args.p_ch,
                            p_circulator=args.p_circ)
        ideal = process_fidelity(
            propagate_green(cfg, pulses, stride=cfg.grid.n_steps).g_ba(),
            target)
    else:
        cfg, report = _synthesized_pulses(args, target, n)
        pulses, ideal = report.pulses_b, report.fidelity
    epsilons = ([args.epsilon] if args.epsilon is not None
                else [float(x) for x in args.epsilon_grid.split(",")])
    omegas = ([args.omega] if args.omega is not None
              else [float(x) for x in args.omega_list.split(",")])
    rows = []
    for eps in epsilons:
        for omega in omegas:
            if eps == 0.0:
                mean, std, runs = ideal, 0.0, args.runs
            else:
                stats = ensemble_fidelity(
                    cfg, pulses, target,
                    NoiseParams(epsilon=eps, omega=omega, seed=args.seed),
                    args.runs)
                mean, std, runs = (stats.mean_fidelity, stats.std_fidelity,
                                   stats.n_runs)
            rows.append((eps, omega, n, label, mean, std, runs))
    out = _resolve_out_dir(args)
    path = os.path.join(out, "noise.csv")
    lines = ["epsilon,omega,n,family,mean_fidelity,std_fidelity,n_runs"]
    for eps, omega, nn, fam, mean, std, runs in sorted(rows):
        lines.append(",".join([_fmt(eps), _fmt(omega), str(nn), fam,
                               _fmt(mean), _fmt(std), str(runs)]))
    _atomic_write(path, "\n".join(lines) + "\n")
    save_result_json(os.path.join(out, "result.json"), "noise-sweep",
                     _echo_config(args, {"ideal_fidelity": ideal}),
                     {"rows": len(rows)}, [path], time.time() - t_start)
    print(f"{len(rows)} noise rows -> {path}")
    return 0


def cmd_loss_sweep(args):
    t_start = time.time()
    n_list = [int(x) for x in args.n_list.split(",") if x.strip()]
    families = [f.strip() for f in args.families.split(",") if f.strip()]
    p_circs = [float(x) for x in args.p_circ_grid.split(",")]
    rows = []
    for n in sorted(n_list):
        for family in families:
            target = (haar_random_unitary(n, args.seed) if family == "haar"
                      else named_unitary(family, n))
            cfg, report = _synthesized_pulses(args, target, n)
            f_ideal = report.fidelity
            t_p = cfg.grid.span
            for p in p_circs:
                lossy = NetworkConfig(n=n, grid=cfg.grid,
                                      detunings=cfg.detunings,
                                      local_decay=args.gamma,
                                      p_channel=args.p_ch, p_circulator=p)
                g_ba = propagate_green(lossy, report.pulses_b,
                                       stride=cfg.grid.n_steps).g_ba()
                sim = process_fidelity(g_ba, target)
                ana = analytic_loss_fidelity(f_ideal, args.gamma, t_p,
                                             args.p_ch, p, n)
                rows.append((n, family, p, args.gamma, args.p_ch, sim, ana,
                             abs(sim - ana)))
    out = _resolve_out_dir(args)
    path = os.path.join(out, "loss.csv")
    lines = ["n,family,p_circ,gamma,p_ch,simulated,analytic,abs_difference"]
    for row in sorted(rows):
        n, fam = row[0], row[1]
        lines.append(",".join([str(n), fam] + [_fmt(v) for v in row[2:]]))
    _atomic_write(path, "\n".join(lines) + "\n")
    save_result_json(os.path.join(out, "result.json"), "loss-sweep",
                     _echo_config(args), {"rows": len(rows)}, [path],
                     time.time() - t_start)
    print(f"{len(rows)} loss rows -> {path}")
    return 0


def cmd_oracle_check(args):
    t_start = time.time()
    target, label, n = _resolve_unitary(args)
    if args.gamma or args.p_ch or args.p_circ:
        raise ValueError("oracle-check requires a lossless configuration")
    cfg, report = _synthesized_pulses(args, target, n)
    traj = propagate_green(cfg, report.pulses_b, stride=cfg.grid.n_steps)
    b_list = [float(x) for x in args.b_list.split(",")]
    table = []
    for b in sorted(b_list):
        oracle, info = simulate_waveguide(WaveguideModel(bandwidth=b), cfg,
                                          report.pulses_b, diagnostics=True)
        table.append({"bandwidth": b,
                      "deviation": compare_to_cascaded(oracle, traj),
                      "norm_error": info["norm_error"],
                      "n_wg_modes": info["n_wg_modes"]})
    main_b = max(b_list)
    deviation = next(r["deviation"] for r in table if r["bandwidth"] == main_b)
    out = _resolve_out_dir(args)
    path = os.path.join(out, "oracle.json")
    _atomic_write(path, json.dumps({
        "config": _echo_config(args, {"unitary_label": label,
                                      "ideal_fidelity": report.fidelity}),
        "convergence": table,
        "max_deviation": deviation,
        "tolerance": args.tolerance,
        "tool_version": __version__,
        "wall_time_s": time.time() - t_start,
    }, indent=2, sort_keys=True) + "\n")
    print(f"deviation at B={main_b:g}: {deviation:.5f} -> {path}")
    return 0 if deviation <= args.tolerance else 2


def cmd_run(args):
    overrides = parse_config_file(args.config)
    command = overrides.pop("command", None)
    if command not in _COMMANDS:
        raise ValueError(f"config must set command = one of {sorted(_COMMANDS)}")
    parser = build_parser()
    # later flags win in argparse, so command-line extras override the file
    tokens = _cli_tokens(command, overrides) + list(args.overrides or [])
    sub_args = parser.parse_args(tokens)
    return sub_args.func(sub_args)


def _cli_tokens(command, overrides):
    tokens = [command]
    for key, value in overrides.items():
        flag = "--" + key.replace("_", "-")
        if isinstance(value, bool):
            if value:
                tokens.append(flag)
            continue
        if isinstance(value, list):
            value = ",".join(str(v) for v in value)
        tokens += [flag, str(value)]
    return tokens


# ---------------------------------------------------------------------------
# argument parsing

def _add_common(p, tf_default=40.0):
    p.add_argument("--n", type=int, default=2, help="modes per register")
    p.add_argument("--unitary", default="transfer",
                   choices=["transfer", "swap", "hadamard",
                            "complex_beamsplitter", "haar"])
    p.add_argument("--unitary-file", default=None,
                   help="CSV of complex entries overriding --unitary")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--tf", type=float, default=tf_default)
    p.add_argument("--t-c", type=float, default=None,
                   help="emitter ramp center (default tf/2)")
    p.add_argument("--delta", type=float, default=2.0)
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--method", default="explicit",
                   choices=["explicit", "implicit"])
    p.add_argument("--threshold", type=float, default=0.99)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--p-ch", type=float, default=0.0)
    p.add_argument("--p-circ", type=float, default=0.0)
    p.add_argument("--detunings", default=None,
                   help="comma-separated 2N mode detunings")
    p.add_argument("--out-dir", default=None,
                   help=f"output directory (default ${OUT_DIR_ENV} or '.')")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bosoncast",
        description="pulse synthesis and simulation for cascaded bosonic "
                    "networks")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("synth", help="synthesize receiver pulses")
    _add_common(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("run", help="run a key=value config file")
    p.add_argument("config")
    p.add_argument("overrides", nargs=argparse.REMAINDER,
                   help="extra flags overriding the file values")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("tmin-scan", help="minimal protocol time scan")
    _add_common(p)
    p.add_argument("--n-list", default="2,4,8",
                   help="comma-separated register sizes")
    p.add_argument("--families", default="transfer",
                   help="comma-separated unitary families")
    p.add_argument("--delta-grid", default=None,
                   help="comma-separated emitter amplitude staggers")
    p.add_argument("--initial-tf", type=float, default=None,
                   help="generous synthesis window before trimming "
                        "(default 20 (1 + (N-1) delta))")
    p.set_defaults(func=cmd_tmin_scan)

    p = sub.add_parser("noise-sweep", help="pulse-noise ensemble sweep")
    _add_common(p)
    p.add_argument("--epsilon", type=float, default=None,
                   help="single noise strength (overrides --epsilon-grid)")
    p.add_argument("--omega", type=float, default=None,
                   help="single noise bandwidth (overrides --omega-list)")
    p.add_argument("--epsilon-grid", default="0,0.001,0.01,0.1")
    p.add_argument("--omega-list", default="1")
    p.add_argument("--runs", type=int, default=400)
    p.add_argument("--pulses-file", default=None,
                   help="reuse a pulse table instead of synthesizing")
    p.set_defaults(func=cmd_noise_sweep)

    p = sub.add_parser("loss-sweep", help="circulator/channel loss sweep")
    _add_common(p)
    p.add_argument("--n-list", default="2,4,8")
    p.add_argument("--families", default="hadamard,swap")
    p.add_argument("--p-circ-grid", default="0,0.002,0.01")
    p.set_defaults(func=cmd_loss_sweep)

    p = sub.add_parser("oracle-check", help="waveguide-model cross-check")
    _add_common(p)
    p.add_argument("--b-list", default="25,50",
                   help="comma-separated channel bandwidths")
    p.add_argument("--tolerance", type=float, default=0.02)
    p.set_defaults(func=cmd_oracle_check)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except ThresholdUnreachableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except UnderResolvedError as exc:
        print(f"error: {exc} (required modes: {exc.required})", file=sys.stderr)
        return 2
    except (ValueError, OSError, SynthesisError,
            UnsupportedDimensionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
