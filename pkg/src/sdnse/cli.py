"""Command-line entry point.

Subcommands: testfns, sdnorm, verify, nse, monitor, pipeline.  Exit
codes: 0 success, 1 usage or configuration error, 2 assertion/check
failure.  Runs are reproducible: a fixed config and seed give
byte-identical CSV outputs, recorded in a run manifest with content
hashes.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import datetime
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

__all__ = ["main", "dispatch", "RunManifest"]

SERIES_COLUMNS = ["t", "E", "enstrophy", "sd_norm", "div_max",
                  "rho_min", "rho_max"]


class UsageError(Exception):
    pass


class CheckFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse variant that exits with code 1 on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


@dataclasses.dataclass
class RunManifest:
    subcommand: str
    config_path: str | None
    seed: int
    version: str
    started: str
    input_hashes: dict = dataclasses.field(default_factory=dict)
    output_hashes: dict = dataclasses.field(default_factory=dict)

    def write(self, path):
        with open(path, "w") as fh:
            json.dump(dataclasses.asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _version() -> str:
    try:
        from importlib.metadata import version
        return version("sdnse")
    except Exception:
        return "unknown"


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _manifest(sub, config_path, seed) -> RunManifest:
    m = RunManifest(subcommand=sub, config_path=config_path, seed=seed,
                    version=_version(),
                    started=datetime.datetime.now(
                        datetime.timezone.utc).isoformat())
    if config_path:
        m.input_hashes[os.path.basename(config_path)] = _sha256(config_path)
    return m


def _load_toml(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise UsageError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise UsageError(f"malformed config {path}: {exc}")


def _threads(args) -> int:
    if getattr(args, "threads", None):
        return args.threads
    env = os.environ.get("SDNSE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"SDNSE_THREADS is not an integer: {env!r}")
    return os.cpu_count() or 1


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# testfns dump
# ---------------------------------------------------------------------------

def _cmd_testfns(args) -> int:
    from .testfns import cube_index, xi

    cube = cube_index(args.cube, args.dim)
    if args.level is not None and args.level != cube.l:
        raise UsageError(
            f"cube {args.cube} lives on level {cube.l}, not {args.level}")
    half = 3.0 * cube.params.eps
    c = float(cube.center[0])
    x = np.linspace(c - half, c + half, args.grid)
    vals = xi(cube, x, axis=0)
    out = args.out or sys.stdout
    rows = [("x", "re_xi", "im_xi")] + [
        (f"{xv:.17g}", f"{v.real:.17g}", f"{v.imag:.17g}")
        for xv, v in zip(x, vals)]
    if isinstance(out, str):
        with open(out, "w", newline="") as fh:
            csv.writer(fh).writerows(rows)
    else:
        csv.writer(out).writerows(rows)
    return 0


# ---------------------------------------------------------------------------
# sdnorm
# ---------------------------------------------------------------------------

def _cmd_sdnorm(args) -> int:
    from .sdspace import read_field_csv, sd_norm, sd_norm_p

    try:
        f = read_field_csv(args.input)
    except FileNotFoundError:
        raise UsageError(f"input field not found: {args.input}")
    except ValueError as exc:
        raise UsageError(str(exc))
    p = math.inf if args.p == "inf" else float(args.p)
    if p == 2.0:
        val = sd_norm(f, K=args.K)
    else:
        val = sd_norm_p(f, p, K=args.K)
    report = {"value": float(np.real(val.value)), "K": val.K,
              "tail_bound": val.tail_bound, "warnings": val.warnings}
    if args.out:
        _write_json(args.out, report)
    else:
        json.dump(report, sys.stdout, indent=2, sort_keys=True)
        print()
    return 0


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def _corpus_spec_from_config(cfg: dict, K: int):
    from .embeddings import CorpusSpec

    c = cfg.get("corpus", {})
    generators = cfg.get("generator", [])
    return CorpusSpec(dim=c.get("dim", 3), lo=c.get("lo", -1.5),
                      hi=c.get("hi", 1.5), points=c.get("points", 33),
                      K=c.get("K", K), seed=c.get("seed", 0),
                      generators=generators)


def _cmd_verify(args) -> int:
    from . import embeddings

    if args.suite != "embeddings":
        raise UsageError(f"unknown suite {args.suite!r}")
    spec = None
    if args.corpus:
        spec = _corpus_spec_from_config(_load_toml(args.corpus), args.K)
    else:
        spec = embeddings.CorpusSpec(K=args.K)

    corpus = embeddings.build_corpus(spec)
    qs = (1.0, 2.0, math.inf)

    def one(item):
        label, f = item
        reps = []
        for q in qs:
            r = embeddings.check_embedding_lp(f, q, spec.K)
            r.name = f"{r.name}:{label}"
            reps.append(r)
        return reps

    # warm the shared constant caches before going parallel
    for q in qs:
        embeddings.embedding_constant(q, spec.K, spec.dim)
    nthreads = _threads(args)
    with ThreadPoolExecutor(max_workers=nthreads) as pool:
        per_item = list(pool.map(one, corpus))
    reports = [r for reps in per_item for r in reps]
    reports.extend(embeddings.suite_extras(spec))

    payload = {"suite": "embeddings",
               "checks": [{"name": r.name, "passed": r.passed,
                           "measured": _jsonable(r.measured),
                           "notes": r.notes} for r in reports]}
    if args.out:
        _write_json(args.out, payload)
    failures = [r for r in reports if not r.passed]
    for r in reports:
        print(r.summary())
    if failures:
        raise CheckFailure(f"{len(failures)} verification checks failed")
    return 0


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


# ---------------------------------------------------------------------------
# nse run
# ---------------------------------------------------------------------------

def _solver_config(cfg: dict):
    from .nse import SolverConfig

    run = cfg.get("run", {})
    forcing = cfg.get("forcing", {})
    density = cfg.get("density", {})
    kwargs = dict(
        nu=run.get("nu", 0.1), N=run.get("N", 32),
        L=run.get("L", 2.0 * math.pi), dt=run.get("dt", 0.01),
        T=run.get("T", 1.0), seed=run.get("seed", 0),
        dealias=run.get("dealias", True),
        checkpoint_every=run.get("checkpoint_every", 10),
        forcing_amplitude=forcing.get("amplitude", 0.0),
        forcing_theta=forcing.get("theta", 0.5),
        sd_truncation=run.get("sd_K", 60),
    )
    if density.get("enabled", False):
        kwargs["mu"] = density.get("mu", run.get("nu", 0.1)
                                   * density.get("beta", 1.0))
        kwargs["beta"] = density.get("beta", 1.0)
        kwargs.pop("nu")
    try:
        return SolverConfig(**kwargs), run, density
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid solver config: {exc}")


def _initial_state(config, run_cfg: dict):
    from . import nse

    kind = run_cfg.get("initial", "taylor-green")
    amp = run_cfg.get("amplitude", 0.5)
    if kind == "taylor-green":
        return nse.taylor_green(config.N, config.L, amplitude=amp)
    if kind == "random":
        return nse.random_divfree(config.N, config.L, seed=config.seed,
                                  kmax=run_cfg.get("kmax", 2), amplitude=amp)
    if kind == "single-mode":
        return nse.single_mode(config.N, config.L, amplitude=amp)
    raise UsageError(f"unknown initial condition {kind!r}")


def _initial_density(config, density_cfg: dict):
    lo = density_cfg.get("rho_min", 0.2)
    hi = density_cfg.get("rho_max", config.beta)
    if not (0.0 <= lo <= hi <= config.beta):
        raise UsageError("density bounds must satisfy 0 <= lo <= hi <= beta")
    N, L = config.N, config.L
    x = -L / 2.0 + L * np.arange(N) / N
    X, Y, Z = np.meshgrid(x, x, x, indexing="ij")
    a = 2.0 * math.pi / L
    profile = 0.5 + 0.25 * (np.sin(a * X) * np.cos(a * Y)
                            + np.cos(a * Z))  # in [0, 1]
    return lo + (hi - lo) * profile


def _fmt(v) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return "nan"
    return f"{v:.17g}"


def _write_series(traj, path):
    series = traj.series
    m = len(traj.times)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SERIES_COLUMNS)
        for i in range(m):
            row = [series["t"][i], series["energy"][i],
                   series["enstrophy"][i],
                   series.get("sd_norm", [None] * m)[i],
                   series["div_max"][i],
                   series.get("rho_min", [None] * m)[i],
                   series.get("rho_max", [None] * m)[i]]
            w.writerow([_fmt(v) for v in row])


def _run_solver(cfg: dict, outdir, manifest: RunManifest):
    from . import nse

    config, run_cfg, density_cfg = _solver_config(cfg)
    u0 = _initial_state(config, run_cfg)
    rho0 = None
    if config.inhomogeneous:
        rho0 = _initial_density(config, density_cfg)
    try:
        traj = nse.solve(config, u0, rho0)
    except (nse.SolverError, ValueError) as exc:
        raise CheckFailure(f"solver aborted: {exc}")
    os.makedirs(outdir, exist_ok=True)
    series_path = os.path.join(outdir, "series.csv")
    _write_series(traj, series_path)
    manifest.output_hashes["series.csv"] = _sha256(series_path)
    from .sdspace import write_field_csv
    for i, state in enumerate(traj.states):
        name = f"checkpoint_{i:04d}.csv"
        write_field_csv(state.to_sampled_field(), os.path.join(outdir, name))
    _write_json(os.path.join(outdir, "run_config.json"), {
        "nu": config.nu, "N": config.N, "L": config.L, "dt": config.dt,
        "T": config.T, "seed": config.seed,
        "forcing_amplitude": config.forcing_amplitude,
        "forcing_theta": config.forcing_theta,
        "checkpoint_every": config.checkpoint_every,
        "sd_K": config.sd_truncation,
        "mu": config.mu, "beta": config.beta,
        "times": list(traj.times)})
    return config, traj


def _cmd_nse(args) -> int:
    if args.action != "run":
        raise UsageError(f"unknown nse action {args.action!r}")
    cfg = _load_toml(args.config)
    manifest = _manifest("nse", args.config,
                         cfg.get("run", {}).get("seed", 0))
    _run_solver(cfg, args.out, manifest)
    manifest.write(os.path.join(args.out, "manifest.json"))
    print(f"run complete: {args.out}/series.csv")
    return 0


# ---------------------------------------------------------------------------
# monitor
# ---------------------------------------------------------------------------

def _load_trajectory(trajdir):
    from .nse import SolverConfig, SpectralField, Trajectory
    from .sdspace import read_field_csv

    cfg_path = os.path.join(trajdir, "run_config.json")
    try:
        with open(cfg_path) as fh:
            meta = json.load(fh)
    except FileNotFoundError:
        raise UsageError(f"not a trajectory directory (no run_config.json): "
                         f"{trajdir}")
    kwargs = dict(nu=meta["nu"], N=meta["N"], L=meta["L"], dt=meta["dt"],
                  T=meta["T"], seed=meta["seed"],
                  forcing_amplitude=meta["forcing_amplitude"],
                  forcing_theta=meta["forcing_theta"],
                  checkpoint_every=meta["checkpoint_every"],
                  sd_truncation=meta["sd_K"])
    if meta.get("mu") is not None:
        kwargs["mu"] = meta["mu"]
        kwargs["beta"] = meta["beta"]
        kwargs.pop("nu")
    config = SolverConfig(**kwargs)
    traj = Trajectory(config=config)
    traj.times = list(meta["times"])
    for i in range(len(traj.times)):
        f = read_field_csv(os.path.join(trajdir, f"checkpoint_{i:04d}.csv"))
        traj.states.append(SpectralField.from_physical(f.components, config.L))
    series_path = os.path.join(trajdir, "series.csv")
    if os.path.exists(series_path):
        with open(series_path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        traj.series = {"t": [float(r["t"]) for r in rows],
                       "energy": [float(r["E"]) for r in rows],
                       "enstrophy": [float(r["enstrophy"]) for r in rows]}
    return config, traj


def _monitor_payload(config, traj, K, nu=None):
    from . import monitor

    nu = nu if nu is not None else config.nu
    report = monitor.check_zero_dissipativity(traj, config, K=K)
    alpha_hat = None
    if config.forcing_amplitude == 0.0:
        try:
            alpha_hat = monitor.decay_fit_trajectory(
                traj, traj.states[0], nu, t_min=0.0)
        except ValueError:
            alpha_hat = None
    if not math.isfinite(report.gamma) or report.gamma >= 1.0:
        raise CheckFailure("no real distinct roots: gamma = "
                           f"{report.gamma:.6g} >= 1")
    payload = report.to_dict()
    payload["contraction"] = None
    payload["alpha_hat"] = alpha_hat
    return payload, report


def _cmd_monitor(args) -> int:
    config, traj = _load_trajectory(args.trajectory)
    payload, report = _monitor_payload(config, traj, args.K, args.nu)
    if args.out:
        _write_json(args.out, payload)
    print(f"M_hat={report.M_hat:.6g} gamma={report.gamma:.6g} "
          f"u_range=[{report.u_minus:.6g}, {report.u_plus:.6g}] "
          f"sigma={report.sigma:.6g} annulus_ok={report.annulus_ok}")
    if not report.annulus_ok:
        raise CheckFailure("dissipativity margin positive inside the annulus")
    return 0


# ---------------------------------------------------------------------------
# pipeline
# ---------------------------------------------------------------------------

def _cmd_pipeline(args) -> int:
    from . import embeddings, monitor, nse

    cfg = _load_toml(args.config)
    outdir = args.out
    os.makedirs(outdir, exist_ok=True)
    manifest = _manifest("pipeline", args.config,
                         cfg.get("run", {}).get("seed", 0))
    config, traj = _run_solver(cfg, outdir, manifest)

    mon_cfg = cfg.get("monitor", {})
    payload, report = _monitor_payload(config, traj, mon_cfg.get("K", 60))
    # contraction pair sharing the solver configuration
    if mon_cfg.get("contraction", True) and config.forcing_amplitude == 0.0:
        u0 = traj.states[0]
        rng = np.random.default_rng(config.seed + 1)
        pert = nse.random_divfree(config.N, config.L,
                                  seed=config.seed + 1, kmax=2,
                                  amplitude=0.2 * max(u0.norm_l2(), 1e-12))
        v0 = nse.SpectralField(u0.uhat + pert.uhat, config.N, config.L)
        crep = monitor.check_contraction(config, u0, v0)
        payload["contraction"] = {
            "nonincreasing": crep.nonincreasing,
            "fitted_rate": crep.fitted_rate, "sigma": crep.sigma,
            "in_region": crep.in_region,
            "distances": [[t, d] for t, d in zip(crep.times,
                                                 crep.distances)]}

    ver_cfg = cfg.get("verify", {})
    spec = embeddings.CorpusSpec(
        dim=ver_cfg.get("dim", 1), lo=ver_cfg.get("lo", -1.5),
        hi=ver_cfg.get("hi", 1.5), points=ver_cfg.get("points", 2049),
        K=ver_cfg.get("K", 100), seed=ver_cfg.get("seed", 0))
    f = embeddings.generate(spec, "gaussian", width=0.3)
    checks = [embeddings.check_embedding_lp(f, q, spec.K)
              for q in (1.0, 2.0, math.inf)]
    payload["verify"] = [{"name": r.name, "passed": r.passed,
                          "measured": _jsonable(r.measured)} for r in checks]
    report_path = os.path.join(outdir, "report.json")
    _write_json(report_path, _jsonable(payload))
    manifest.output_hashes["report.json"] = _sha256(report_path)
    manifest.write(os.path.join(outdir, "manifest.json"))
    failed = [c for c in checks if not c.passed]
    if failed or not report.annulus_ok:
        raise CheckFailure("pipeline checks failed")
    print(f"pipeline complete: {report_path}")
    return 0


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

def _build_parser() -> _Parser:
    p = _Parser(prog="sdnse", description=__doc__)
    p.add_argument("--threads", type=int, default=None,
                   help="parallelism degree (default: SDNSE_THREADS or "
                        "available cores)")
    sub = p.add_subparsers(dest="subcommand", required=True)

    t = sub.add_parser("testfns", help="dump test-function samples")
    t.add_argument("action", choices=["dump"])
    t.add_argument("--level", type=int, default=None)
    t.add_argument("--cube", type=int, required=True)
    t.add_argument("--grid", type=int, default=201)
    t.add_argument("--dim", type=int, default=1)
    t.add_argument("--out", default=None)
    t.set_defaults(func=_cmd_testfns)

    s = sub.add_parser("sdnorm", help="weighted-functional norm of a field")
    s.add_argument("--input", required=True)
    s.add_argument("--p", default="2")
    s.add_argument("--K", type=int, default=200)
    s.add_argument("--out", default=None)
    s.set_defaults(func=_cmd_sdnorm)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("--suite", default="embeddings")
    v.add_argument("--corpus", default=None)
    v.add_argument("--K", type=int, default=200)
    v.add_argument("--out", default=None)
    v.set_defaults(func=_cmd_verify)

    n = sub.add_parser("nse", help="solver runs")
    n.add_argument("action", choices=["run"])
    n.add_argument("--config", required=True)
    n.add_argument("--out", required=True)
    n.set_defaults(func=_cmd_nse)

    m = sub.add_parser("monitor", help="dissipativity report for a run")
    m.add_argument("--trajectory", required=True)
    m.add_argument("--nu", type=float, default=None)
    m.add_argument("--K", type=int, default=60)
    m.add_argument("--out", default=None)
    m.set_defaults(func=_cmd_monitor)

    pl = sub.add_parser("pipeline", help="solve, monitor and verify")
    pl.add_argument("--config", required=True)
    pl.add_argument("--out", required=True)
    pl.set_defaults(func=_cmd_pipeline)
    return p


def dispatch(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except CheckFailure as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
