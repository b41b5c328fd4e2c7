"""Command-line driver: one INI config per run, CSV/JSON artifacts, manifest.

    cmvwalk simulate --config run.ini --out results/
    cmvwalk verify --level quick

Exit codes: 0 success, 2 a checked invariant failed, 3 bad configuration.
"""

import argparse
import configparser
import io
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import CMVError, ConfigError, GridTooShort

TASKS = ("simulate", "spectrum", "tracemap", "floquet", "bounds", "verify")
MODEL_KINDS = ("periodic", "fibonacci", "thue_morse", "polymer", "explicit", "verblunsky")
ENV_OUT = "CMVWALK_OUT"

EXIT_OK, EXIT_CHECK, EXIT_CONFIG = 0, 2, 3


class CheckFailed(Exception):
    """A run finished but one of its invariants did not hold."""


# ---------------------------------------------------------------------------
# value codecs: (parse, format) pairs, lossless for the types they cover

def _split(text, sep=","):
    return [t.strip() for t in text.split(sep) if t.strip()]


def _fmt_float(x):
    return repr(float(x))


def _fmt_complex(c):
    c = complex(c)
    return repr(c.real) if c.imag == 0 else f"{c.real!r}{c.imag:+.17g}j"


def _parse_bool(text):
    t = text.strip().lower()
    if t in ("true", "yes", "1", "on"):
        return True
    if t in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


CODECS = {
    "int": (lambda t: int(t.strip()), str),
    "float": (lambda t: float(t.strip()), _fmt_float),
    "str": (lambda t: t.strip(), str),
    "bool": (_parse_bool, lambda b: "true" if b else "false"),
    "floats": (lambda t: [float(v) for v in _split(t)], lambda v: ", ".join(map(_fmt_float, v))),
    "ints": (lambda t: [int(v) for v in _split(t)], lambda v: ", ".join(map(str, v))),
    "strs": (lambda t: _split(t), lambda v: ", ".join(v)),
    "complexes": (lambda t: [complex(v.replace(" ", "")) for v in _split(t)],
                  lambda v: ", ".join(map(_fmt_complex, v))),
    # chains of rotation angles: "0.7, -0.7; 0.3"
    "chains": (lambda t: [[float(v) for v in _split(c)] for c in _split(t, ";")],
               lambda v: "; ".join(", ".join(map(_fmt_float, c)) for c in v)),
    # explicit coins, four complex entries each: "q11, q12, q21, q22; ..."
    "coins": (lambda t: [[complex(v.replace(" ", "")) for v in _split(c)] for c in _split(t, ";")],
              lambda v: "; ".join(", ".join(map(_fmt_complex, c)) for c in v)),
}

SCHEMA = {
    "run": {"task": "str", "out": "str", "seed": "int", "threads": "int"},
    "model": {"kind": "str", "theta_a": "float", "theta_b": "float", "angles": "floats",
              "alpha": "complexes", "chains": "chains", "word": "ints", "seed": "int",
              "coins": "coins", "n_min": "int"},
    "simulate": {"K_max": "int", "k_max": "int", "ps": "floats", "points": "int",
                 "site": "int", "profile_steps": "ints", "last_decades": "float"},
    "spectrum": {"level": "int", "grid_density": "int", "n_theta": "int"},
    "tracemap": {"theta": "float", "k_max": "int", "levels": "int", "lam": "float",
                 "escape_delta": "float"},
    "floquet": {"n_theta": "int", "L_values": "ints", "site": "int"},
    "bounds": {"K_min": "int", "K_max": "int", "points": "int", "N_C": "float", "N_a": "float",
               "sides": "strs", "gamma": "float", "R_grid": "ints", "z_arg": "float",
               "window": "bool", "ps": "floats", "lam": "float", "K_cap": "int"},
    "verify": {"level": "str", "modules": "strs"},
}


@dataclass
class RunConfig:
    """Typed view of an INI run file. Only keys present in the file are kept,
    so serialization reproduces the input values exactly."""
    sections: dict = field(default_factory=dict)

    def get(self, section, key, default=None):
        return self.sections.get(section, {}).get(key, default)

    def set(self, section, key, value):
        if section not in SCHEMA or key not in SCHEMA[section]:
            raise ConfigError(f"unknown key [{section}] {key}")
        self.sections.setdefault(section, {})[key] = value

    @property
    def task(self):
        return self.get("run", "task")

    @classmethod
    def from_string(cls, text):
        cp = configparser.ConfigParser(interpolation=None, delimiters=("=",))
        cp.optionxform = str
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"unreadable config: {exc}") from exc
        cfg = cls()
        for sec in cp.sections():
            if sec not in SCHEMA:
                raise ConfigError(f"unknown section [{sec}]")
            for key, raw in cp.items(sec):
                if key not in SCHEMA[sec]:
                    raise ConfigError(f"unknown key [{sec}] {key}")
                parse = CODECS[SCHEMA[sec][key]][0]
                try:
                    cfg.sections.setdefault(sec, {})[key] = parse(raw)
                except ValueError as exc:
                    raise ConfigError(f"bad value for [{sec}] {key}: {raw!r}") from exc
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path):
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from exc
        return cls.from_string(text)

    def to_string(self):
        buf = io.StringIO()
        for sec in SCHEMA:
            if sec not in self.sections:
                continue
            buf.write(f"[{sec}]\n")
            for key in SCHEMA[sec]:
                if key in self.sections[sec]:
                    fmt = CODECS[SCHEMA[sec][key]][1]
                    buf.write(f"{key} = {fmt(self.sections[sec][key])}\n")
            buf.write("\n")
        return buf.getvalue()

    def validate(self):
        task = self.task
        if task is not None and task not in TASKS:
            raise ConfigError(f"unknown task {task!r}")
        kind = self.get("model", "kind")
        if "model" in self.sections:
            if kind not in MODEL_KINDS:
                raise ConfigError(f"model kind must be one of {', '.join(MODEL_KINDS)}")
            need = {"periodic": ("angles",), "fibonacci": ("theta_a", "theta_b"),
                    "thue_morse": ("theta_a", "theta_b"), "polymer": ("chains",),
                    "explicit": ("coins",), "verblunsky": ("alpha",)}[kind]
            for key in need:
                if self.get("model", key) is None:
                    raise ConfigError(f"model kind {kind} needs [model] {key}")
            if kind == "explicit" and any(len(c) != 4 for c in self.get("model", "coins")):
                raise ConfigError("each explicit coin needs four entries")
        threads = self.get("run", "threads")
        if threads is not None and threads < 1:
            raise ConfigError("threads must be >= 1")
        seed = self.get("run", "seed")
        if seed is not None and not 0 <= seed < 2 ** 64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        level = self.get("verify", "level")
        if level is not None and level not in ("quick", "full"):
            raise ConfigError("verify level must be quick or full")


# ---------------------------------------------------------------------------
# model construction

def build_model(cfg):
    """(coin sequence or None, Verblunsky sequence) from the [model] section."""
    from . import coins
    kind = cfg.get("model", "kind")
    if kind is None:
        raise ConfigError("this task needs a [model] section")
    m = cfg.sections["model"]
    try:
        if kind == "periodic":
            cs = coins.PeriodicCoins([coins.rotation_coin(t) for t in m["angles"]])
        elif kind == "fibonacci":
            cs = coins.FibonacciCoins(m["theta_a"], m["theta_b"])
        elif kind == "thue_morse":
            cs = coins.ThueMorseCoins(m["theta_a"], m["theta_b"])
        elif kind == "polymer":
            chains = [[coins.rotation_coin(t) for t in ch] for ch in m["chains"]]
            seed = m.get("seed", cfg.get("run", "seed"))
            if "word" in m:
                cs = coins.PolymerCoins(chains, word=m["word"])
            elif seed is not None:
                cs = coins.PolymerCoins(chains, seed=seed)
            else:
                raise ConfigError("polymer model needs [model] word or a seed")
        elif kind == "explicit":
            mats = [np.array([[c[0], c[1]], [c[2], c[3]]]) for c in m["coins"]]
            cs = coins.ExplicitCoins(mats, m.get("n_min", 0))
        else:
            return None, coins.PeriodicVerblunsky(m["alpha"])
    except (CMVError, ValueError) as exc:
        raise ConfigError(f"invalid model: {exc}") from exc
    return cs, coins.CoinVerblunsky(cs)


def periodic_alphas(cfg):
    """One period of alpha for the floquet task."""
    from . import coins
    cs, seq = build_model(cfg)
    if cs is None:
        return np.asarray(cfg.get("model", "alpha"), complex)
    if not isinstance(cs, coins.PeriodicCoins):
        raise ConfigError("floquet needs a periodic or verblunsky model")
    p = 2 * cs.period
    a = seq.window(0, 2 * p - 1)
    if np.max(np.abs(a[:p] - a[p:])) > 1e-12:
        raise ConfigError("gauge phases make these coefficients skew-periodic; "
                          "give the model as kind = verblunsky")
    return a[:p]


# ---------------------------------------------------------------------------
# tasks; each returns the list of files it wrote and a summary dict

def _grid(lo, hi, points):
    from .dynamics import log_grid
    return log_grid(lo, hi, points)


def task_simulate(cfg, out, ctx):
    from . import dynamics
    from .io import write_csv
    _, seq = build_model(cfg)
    s = cfg.sections.get("simulate", {})
    ps = s.get("ps", [1.0, 2.0])
    K_max = s.get("K_max", 1000)
    k_max = s.get("k_max", dynamics.horizon_for(K_max))
    if dynamics.horizon_for(K_max) > k_max:
        raise ConfigError(f"k_max = {k_max} is too short for K_max = {K_max}")
    site = s.get("site", 0)
    run = dynamics.simulate(seq, {site: 1.0}, k_max, ps=tuple(ps))
    norm_gap = float(np.max(np.abs(run.norms - 1.0)))
    Ks = _grid(10, K_max, s.get("points", 31))
    files, betas = [], []
    moment_rows = []
    for p in ps:
        av = run.averaged(p, Ks)
        moment_rows += [(int(K), p, v) for K, v in zip(Ks, av)]
        try:
            b = dynamics.estimate_beta(Ks, av, p, last_decades=s.get("last_decades", 1.0))
        except GridTooShort as exc:
            raise ConfigError(f"K grid too short for exponent fits: {exc}") from exc
        betas.append((p, b["beta_lower"], b["beta_upper"], b["slope"], b["residual"]))
    files.append(write_csv(out / "moments.csv", ("K", "p", "moment"), moment_rows))
    files.append(write_csv(out / "betas.csv", ("p", "beta_lower", "beta_upper", "slope", "residual"),
                           betas))
    steps = sorted(set(s.get("profile_steps", [min(k_max, 100)])))
    if steps[-1] > k_max:
        raise ConfigError("profile step beyond k_max")
    n_min, n_max = dynamics.cone_window({site: 1.0}, steps[-1])
    from .cmv import build_cmv
    E = build_cmv(seq, n_min, n_max)
    rows = []
    for pkt in dynamics.evolve(E, {site: 1.0}, steps[-1]):
        if pkt.k in steps:
            prob = pkt.probabilities()
            keep = prob > 0
            rows += [(pkt.k, int(n), float(v)) for n, v in zip(pkt.sites[keep], prob[keep])]
    files.append(write_csv(out / "profile.csv", ("k", "n", "prob"), rows))
    if norm_gap > 1e-10:
        raise CheckFailed(f"norm drift {norm_gap:.3g}")
    return files, {"k_max": k_max, "norm_gap": norm_gap,
                   "betas": {str(b[0]): b[3] for b in betas}}


def task_spectrum(cfg, out, ctx):
    from . import floquet, tracemap
    from .io import write_csv
    kind = cfg.get("model", "kind")
    s = cfg.sections.get("spectrum", {})
    files = []
    if kind == "fibonacci":
        ta, tb = cfg.get("model", "theta_a"), cfg.get("model", "theta_b")
        level = s.get("level", 6)
        levels = tracemap.band_hierarchy(ta, tb, level, s.get("grid_density", 16))
        rows = []
        for k in range(-1, level + 1):
            typed = levels[k] if k < 1 else tracemap.classify_bands(levels, k)[0]
            rows += [(k, b.theta1, b.theta2, b.type or "") for b in typed]
        files.append(write_csv(out / "bands.csv", ("level", "theta1", "theta2", "type"), rows))
        summary = {"bands_per_level": {str(k): len(levels[k]) for k in levels}}
    elif kind == "thue_morse":
        ta, tb = cfg.get("model", "theta_a"), cfg.get("model", "theta_b")
        n = s.get("level", 6) + 2
        found = tracemap.tm_closed_gap_search(ta, tb, n)
        rows = []
        worst = 0.0
        for r in found:
            rep = tracemap.verify_closed_gap_mp(ta, tb, r["theta"], r["k"], r["k"] + 4)
            worst = max(worst, rep["monodromy"])
            rows.append((r["k"], r["theta"], rep["monodromy"], rep["trace"], rep["derivative"]))
        files.append(write_csv(out / "closed_gaps.csv",
                               ("k", "theta", "monodromy_gap", "trace_gap", "derivative"), rows))
        summary = {"closed_gaps": len(rows), "max_monodromy_gap": worst}
        if worst > 1e-8:
            raise CheckFailed(f"closed gap monodromy off identity by {worst:.3g}")
    else:
        a = periodic_alphas(cfg)
        arcs = floquet.band_arcs(a)
        rows = [(0, lo, hi, "floquet") for lo, hi in arcs]
        files.append(write_csv(out / "bands.csv", ("level", "theta1", "theta2", "type"), rows))
        summary = {"arcs": len(arcs)}
    return files, summary


def task_tracemap(cfg, out, ctx):
    from . import tracemap
    from .io import write_csv, write_json
    kind = cfg.get("model", "kind")
    if kind not in ("fibonacci", "thue_morse"):
        raise ConfigError("tracemap needs a fibonacci or thue_morse model")
    ta, tb = cfg.get("model", "theta_a"), cfg.get("model", "theta_b")
    s = cfg.sections.get("tracemap", {})
    theta = s.get("theta", 0.5)
    files = []
    if kind == "fibonacci":
        orb = tracemap.fib_orbit(ta, tb, theta, s.get("k_max", 20), s.get("escape_delta", 0.0))
    else:
        orb = tracemap.tm_orbit(ta, tb, theta, s.get("k_max", 12))
    rows = [(int(k), float(x), float(lx)) for k, x, lx in zip(orb.ks, orb.values, orb.log_abs)]
    files.append(write_csv(out / "orbit.csv", ("k", "x", "logabs"), rows))
    summary = {"escape_index": orb.escape_index}
    if kind == "fibonacci":
        rep = tracemap.coupling_report(ta, tb, s.get("levels", 8))
        rep["large_coupling"] = bool(rep["mu"] >= s.get("lam", 32.0))
        files.append(write_json(out / "coupling.json", rep))
        I0 = tracemap.invariant_closed_form(ta, tb, np.exp(1j * theta))
        gap = tracemap.invariant_drift(orb, I0)
        summary.update(invariant_gap=gap, mu=rep["mu"])
        if gap > 1e-10:
            raise CheckFailed(f"invariant drift {gap:.3g}")
        if orb.growth_ok is False:
            raise CheckFailed("post-escape growth bound violated")
    return files, summary


def task_floquet(cfg, out, ctx):
    from . import floquet
    from .io import write_csv, write_json
    a = periodic_alphas(cfg)
    s = cfg.sections.get("floquet", {})
    rep = floquet.velocities_and_J(a, s.get("n_theta", 256))
    files = []
    rows = [(t, j, lam.real, lam.imag) for t, lams in zip(rep.thetas, rep.eigenvalues)
            for j, lam in enumerate(lams)]
    files.append(write_csv(out / "bands_floquet.csv", ("theta", "j", "re_lambda", "im_lambda"),
                           rows))
    rows = [(t, j, v) for t, vs in zip(rep.thetas, rep.velocities) for j, v in enumerate(vs)]
    files.append(write_csv(out / "velocities.csv", ("theta", "j", "v"), rows))
    arcs = floquet.band_arcs(a)
    files.append(write_csv(out / "bands.csv", ("level", "theta1", "theta2", "type"),
                           [(0, lo, hi, "floquet") for lo, hi in arcs]))
    unimod = float(np.max(np.abs(np.abs(rep.eigenvalues) - 1.0)))
    L_values = s.get("L_values", [100, 200, 400])
    ball = floquet.ballistic_check(a, {s.get("site", 0): 1.0}, L_values)
    report = {"alpha": [complex(x) for x in a], "band_arcs": arcs,
              "cross_check": rep.cross_check, "j_spectrum": rep.j_spectrum,
              "min_abs_velocity": rep.min_abs_velocity, "unimodularity": unimod,
              "ballistic": ball}
    files.append(write_json(out / "velocity.json", report))
    if unimod > 1e-12:
        raise CheckFailed(f"fiber eigenvalues off the circle by {unimod:.3g}")
    if rep.cross_check > 1e-6:
        raise CheckFailed(f"velocity cross-check {rep.cross_check:.3g}")
    return files, {"cross_check": rep.cross_check, "J_norm": ball["J_norm"],
                   "s_L_rel": ball["rows"][-1]["s_L_rel"]}


def task_bounds(cfg, out, ctx):
    from . import bounds, coins
    from .io import write_csv, write_json
    from .tracemap import coupling_report
    cs, seq = build_model(cfg)
    kind = cfg.get("model", "kind")
    s = cfg.sections.get("bounds", {})
    files, summary = [], {}
    Ks = _grid(s.get("K_min", 10), s.get("K_max", 1000), s.get("points", 9))
    rule = bounds.power_rule(s.get("N_C", 2.0), s.get("N_a", 0.5))
    sides = tuple(s.get("sides", ["right", "left"]))
    sw = bounds.gz_integrand_sweep(seq, Ks, rule, sides=sides, K_cap=s.get("K_cap", 10 ** 4),
                                   workers=ctx["threads"])
    worst = np.fmax(sw.log_right, sw.log_left)
    local = np.concatenate([[math.nan], np.diff(worst) / np.diff(np.log(sw.Ks))])
    rows = [(int(K), int(N), math.exp(lr) if np.isfinite(lr) else math.nan,
             math.exp(ll) if np.isfinite(ll) else math.nan, lr, ll, sl)
            for K, N, lr, ll, sl in zip(sw.Ks, sw.Ns, sw.log_right, sw.log_left, local)]
    files.append(write_csv(out / "integrand.csv",
                           ("K", "N", "I_right", "I_left", "log_I_right", "log_I_left", "slope"),
                           rows))
    summary.update(slope_right=sw.slope_right, slope_left=sw.slope_left,
                   floor_hit=sw.floor_hit)
    above = float(np.nanmax(worst))
    if above > 1e-9:
        raise CheckFailed(f"integrand above one (log I = {above:.3g})")

    # power-law certificate
    R_grid = tuple(s.get("R_grid", [4, 8, 16, 32]))
    if kind == "fibonacci":
        ta, tb = cfg.get("model", "theta_a"), cfg.get("model", "theta_b")
        rep = coupling_report(ta, tb)
        gamma = s.get("gamma", rep["tau"])
        sets = bounds.fibonacci_band_sets(ta, tb)
    else:
        gamma = s.get("gamma", 0.0)
        z0 = complex(np.exp(1j * s.get("z_arg", 0.0)))
        sets = lambda R: np.array([z0])  # noqa: E731
    cert = bounds.verify_power_law(seq, sets, gamma, R_grid=R_grid)
    ps = s.get("ps", [2.0, 10.0])
    cert_json = {"gamma": cert.gamma, "C": cert.C, "R_grid": cert.R_grid,
                 "worst_ratio": cert.worst_ratio, "samples": cert.samples,
                 "violation": cert.violation, "valid": cert.valid}
    if kind != "fibonacci":
        cert_json["predicted"] = {str(p): dict(zip(("moment_exponent", "beta_lower"),
                                                   bounds.predicted_lower_exponent(cert, p)))
                                  for p in ps}
    files.append(write_json(out / "certificate.json", cert_json))
    if kind == "polymer":
        crit, _ = coins.is_critical(cs, complex(np.exp(1j * s.get("z_arg", 0.0))))
        summary["critical"] = crit
    if kind == "fibonacci" and s.get("window", False):
        ta, tb = cfg.get("model", "theta_a"), cfg.get("model", "theta_b")
        win = bounds.fibonacci_dynamical_window(ta, tb, ps=tuple(ps), lam=s.get("lam", 32.0))
        files.append(write_json(out / "window.json", win))
        summary["window_inside"] = all(r["inside"] for r in win["rows"])
        if not summary["window_inside"]:
            raise CheckFailed("empirical exponents outside the predicted window")
    return files, summary


def task_verify(cfg, out, ctx):
    from .checks import run_suite
    from .io import write_json
    s = cfg.sections.get("verify", {})
    level = ctx.get("level") or s.get("level", "quick")
    rep = run_suite(level, ctx["seed"], only=s.get("modules"))
    for e in rep["checks"]:
        print(f"{'PASS' if e['ok'] else 'FAIL'}  {e['module']:<13} {e['name']:<32} "
              f"{e['seconds']:8.2f}s")
    print(f"{rep['passed']} passed, {rep['failed']} failed ({level})")
    # timings vary run to run; keep them out of the artifact
    saved = dict(rep, checks=[{k: v for k, v in e.items() if k != "seconds"}
                              for e in rep["checks"]])
    files = [write_json(out / "verify.json", saved)]
    if rep["failed"]:
        raise CheckFailed(f"{rep['failed']} checks failed")
    return files, {"passed": rep["passed"]}


RUNNERS = {"simulate": task_simulate, "spectrum": task_spectrum, "tracemap": task_tracemap,
           "floquet": task_floquet, "bounds": task_bounds, "verify": task_verify}


# ---------------------------------------------------------------------------

def resolve_out(cfg, task, flag=None):
    if flag:
        return Path(flag)
    if cfg.get("run", "out"):
        return Path(cfg.get("run", "out"))
    root = os.environ.get(ENV_OUT)
    return Path(root or "cmvwalk-out") / task


def run(cfg, task=None, out=None, threads=None, seed=None, level=None):
    """Execute one configured task. Returns (exit code, summary)."""
    from .io import write_json, write_manifest
    task = task or cfg.task
    if task is None:
        raise ConfigError("no task given")
    if cfg.task is not None and cfg.task != task:
        raise ConfigError(f"config is for task {cfg.task!r}, not {task!r}")
    if seed is not None:
        cfg.set("run", "seed", int(seed))
    cfg.validate()
    threads = threads or cfg.get("run", "threads") or os.cpu_count() or 1
    ctx = {"threads": threads, "seed": cfg.get("run", "seed", 0), "level": level}
    out_dir = resolve_out(cfg, task, out)
    out_dir.mkdir(parents=True, exist_ok=True)
    code, summary, error = EXIT_OK, {}, None
    t0 = time.perf_counter()
    try:
        files, summary = RUNNERS[task](cfg, out_dir, ctx)
    except CheckFailed as exc:
        code, error, files = EXIT_CHECK, str(exc), sorted(out_dir.glob("*.*"))
    except ConfigError:
        raise
    except CMVError as exc:
        code, error, files = EXIT_CHECK, f"{type(exc).__name__}: {exc}", sorted(out_dir.glob("*.*"))
    files = [Path(f) for f in files if Path(f).name not in ("manifest.json", "config.ini",
                                                            "summary.json")]
    cfg_copy = out_dir / "config.ini"
    cfg_copy.write_text(cfg.to_string())
    summ = write_json(out_dir / "summary.json", {"task": task, "exit_code": code,
                                                 "error": error, "summary": summary})
    write_manifest(out_dir, files + [cfg_copy, summ],
                   extra={"task": task, "version": __version__})
    elapsed = time.perf_counter() - t0
    print(f"{task}: exit {code} in {elapsed:.1f}s -> {out_dir}"
          + (f" ({error})" if error else ""), file=sys.stderr)
    return code, summary


def make_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI run file")
    common.add_argument("--out", help=f"output directory (default ${ENV_OUT}/<task>)")
    common.add_argument("--threads", type=int, help="worker threads (default: all cores)")
    common.add_argument("--seed", type=int, help="seed for random words and checks")
    parser = argparse.ArgumentParser(prog="cmvwalk", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="task", required=True)
    for task in TASKS:
        sp = sub.add_parser(task, parents=[common])
        if task == "verify":
            sp.add_argument("--level", choices=("quick", "full"))
    sp = sub.add_parser("run", parents=[common], help="run the task named in the config")
    return parser


def main(argv=None):
    args = make_parser().parse_args(argv)
    try:
        cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
        task = cfg.task if args.task == "run" else args.task
        if args.threads is not None and args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        code, _ = run(cfg, task, args.out, args.threads, args.seed,
                      getattr(args, "level", None))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return code


if __name__ == "__main__":
    sys.exit(main())
