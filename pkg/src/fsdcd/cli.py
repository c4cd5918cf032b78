"""Command-line experiment runner.

    fsdcd generate --config exp.toml      write the problem instance
    fsdcd run      --config exp.toml      run every solver, write CSV traces + summary
    fsdcd certify  --config exp.toml      compare Monte Carlo contraction to the rate bound
    fsdcd plotdata --out prefix           turn CSV traces into gnuplot data files
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from fsdcd import io as fio
from fsdcd.convex import make_objective
from fsdcd.linalg import FAMILIES, ProblemInstance, make_problem, stream
from fsdcd.metrics import empirical_contraction, epochs_to_tolerance, rate_certificate
from fsdcd.sampling import make_space
from fsdcd.solvers import METHODS, SolveOptions, solve

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

log = logging.getLogger("fsdcd")

SAMPLING_KINDS = ("single_row", "block_partition", "weighted_block", "identity", "gaussian_sketch")
OBJECTIVES = ("quadratic", "elastic_net")
# methods whose behaviour depends on the sampling space
SAMPLED = ("sdcd", "fsdcd")
SOLVER_PARAMS = {
    "sdcd": {"zeta"},
    "fsdcd": {"xi0"},
    "lb": {"step"},
    "alb": {"step"},
    "admm": {"nu", "gamma", "beta", "mu"},
    "rsk": set(),
    "rska": {"eta", "weights"},
    "cgne": set(),
}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    problem: dict
    objective: dict = field(default_factory=lambda: {"kind": "elastic_net", "mu": 1.0})
    solvers: list = field(default_factory=lambda: [{"name": "fsdcd"}, {"name": "sdcd"}])
    sampling: dict = field(default_factory=lambda: {"kind": "block_partition", "tau": 4})
    trials: int = 1
    stop: dict = field(default_factory=lambda: {"rse_tol": 1e-12, "max_epochs": 500})
    output: dict = field(default_factory=lambda: {"path": "out/run"})
    certify: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        known = {"problem", "objective", "solvers", "sampling", "trials", "stop", "output", "certify"}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "problem" not in raw:
            raise ConfigError("config needs a [problem] table")
        cfg = cls(**{k: v for k, v in raw.items()})
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        try:
            with open(path, "rb") as fh:
                raw = tomllib.load(fh)
        except OSError as exc:
            raise OSError(f"cannot read config {path}: {exc}") from exc
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        return cls.from_dict(raw)

    def validate(self) -> None:
        p = self.problem
        if "instance" not in p:
            for key in ("family", "m", "n", "s", "seed"):
                if key not in p:
                    raise ConfigError(f"problem.{key} is required")
            if p["family"] not in FAMILIES or p["family"] == "custom":
                raise ConfigError(f"problem.family must be one of {FAMILIES[:3]}, got {p['family']!r}")
            for key in ("m", "n", "s"):
                if not isinstance(p[key], int) or p[key] < 1:
                    raise ConfigError(f"problem.{key} must be a positive integer")
            if p["s"] > p["n"]:
                raise ConfigError("problem.s cannot exceed problem.n")
        if self.objective.get("kind") not in OBJECTIVES:
            raise ConfigError(f"objective.kind must be one of {OBJECTIVES}")
        if self.objective["kind"] == "elastic_net" and not self.objective.get("mu", 1.0) > 0:
            raise ConfigError("objective.mu must be positive")
        if not self.solvers:
            raise ConfigError("at least one solver is required")
        for entry in self.solvers:
            name = entry.get("name")
            if name not in METHODS:
                raise ConfigError(f"unknown solver {name!r}; choose from {METHODS}")
            extra = set(entry) - {"name"} - SOLVER_PARAMS[name]
            if extra:
                raise ConfigError(f"solver {name!r}: unknown parameters {sorted(extra)}")
            if "zeta" in entry and not 0 < entry["zeta"] < 2:
                raise ConfigError("zeta must lie in (0, 2)")
            if name == "cgne" and self.objective["kind"] != "quadratic":
                raise ConfigError("cgne needs objective.kind = 'quadratic'")
        if self.sampling.get("kind") not in SAMPLING_KINDS:
            raise ConfigError(f"sampling.kind must be one of {SAMPLING_KINDS}")
        for tau in self.taus():
            if tau != "m" and (not isinstance(tau, int) or tau < 1):
                raise ConfigError(f"sampling.tau entries must be positive integers or 'm', got {tau!r}")
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError("trials must be a positive integer")
        if not self.stop.get("rse_tol", 1e-12) > 0:
            raise ConfigError("stop.rse_tol must be positive")
        if not self.stop.get("max_epochs", 500) > 0:
            raise ConfigError("stop.max_epochs must be positive")

    def taus(self) -> list:
        tau = self.sampling.get("tau", 1)
        return list(tau) if isinstance(tau, list) else [tau]

    @property
    def seed(self) -> int:
        return int(self.problem.get("seed", 0))

    def options(self, **overrides) -> SolveOptions:
        kw = {"rse_tol": float(self.stop.get("rse_tol", 1e-12)), "max_epochs": float(self.stop.get("max_epochs", 500))}
        if "max_iters" in self.stop:
            kw["max_iters"] = int(self.stop["max_iters"])
        kw.update(overrides)
        return SolveOptions(**kw)


def build_problem(cfg: ExperimentConfig) -> ProblemInstance:
    p = cfg.problem
    if "instance" in p:
        return fio.load_instance(p["instance"])
    return make_problem(p["family"], p["m"], p["n"], p["s"], cfg.seed)


def reference_solution(problem: ProblemInstance, objective_kind: str) -> ProblemInstance:
    """For the plain quadratic the target is the minimum-norm solution, not the planted one."""
    if objective_kind != "quadratic":
        return problem
    xhat = np.linalg.lstsq(problem.A, problem.b, rcond=None)[0]
    return ProblemInstance(problem.A, problem.b, xhat, problem.family, problem.seed,
                           {**problem.meta, "reference": "minimum_norm"})


def _objective(cfg):
    return make_objective(cfg.objective["kind"], mu=cfg.objective.get("mu", 1.0))


def _space(cfg, problem, tau, trial):
    params = {k: v for k, v in cfg.sampling.items() if k not in ("kind", "tau")}
    if tau is not None:
        params["tau"] = problem.shape[0] if tau == "m" else tau
        params.setdefault("eta", params["tau"])
    return make_space(cfg.sampling["kind"], problem.A, stream(cfg.seed, trial, 0), **params)


def _solver_params(entry):
    params = {k: v for k, v in entry.items() if k not in ("name", "zeta")}
    if params.get("xi0") == "zero":
        params["xi0"] = 0.0
    return params


def cmd_generate(cfg: ExperimentConfig, out: str | None = None) -> Path:
    problem = build_problem(cfg)
    path = Path(out or cfg.output.get("path", "out/run") + "_instance.npz")
    if path.suffix != ".npz":
        path = path.with_suffix(".npz")
    fio.save_instance(problem, path)
    log.info("wrote %s (%dx%d, family=%s)", path, *problem.shape, problem.family)
    return path


def cmd_run(cfg: ExperimentConfig, out: str | None = None) -> dict:
    prefix = out or cfg.output.get("path", "out/run")
    f = _objective(cfg)
    problem = reference_solution(build_problem(cfg), cfg.objective["kind"])
    m = problem.shape[0]
    rse_tol = float(cfg.stop.get("rse_tol", 1e-12))
    uses_tau = cfg.sampling["kind"] in ("block_partition", "weighted_block")
    results = []
    for entry in cfg.solvers:
        name = entry["name"]
        taus = cfg.taus() if (name in SAMPLED and uses_tau) else [None]
        opts = cfg.options(**({"zeta": entry["zeta"]} if "zeta" in entry else {}))
        for tau in taus:
            label = name if tau is None else f"{name}_tau{m if tau == 'm' else tau}"
            per_trial, conv, files = [], [], []
            for t in range(cfg.trials):
                space = _space(cfg, problem, tau, t) if name in SAMPLED else None
                xi_params = _solver_params(entry)
                if name == "fsdcd" and "xi0" in xi_params and np.isscalar(xi_params["xi0"]):
                    xi_params["xi0"] = np.full(m, float(xi_params["xi0"]))
                _, trace = solve(problem, f, space, opts, rng=stream(cfg.seed, t, 1), method=name, **xi_params)
                csv_path = fio.write_trace_csv(trace, f"{prefix}_{label}_trial{t}.csv")
                files.append(str(csv_path))
                per_trial.append(epochs_to_tolerance(trace, rse_tol))
                conv.append(trace.converged)
                log.info("%s trial %d: %d iterations, %.2f epochs, rse %.3e",
                         label, t, trace.final.iter, trace.final.epochs, trace.final.rse)
            med = float(np.median(per_trial))
            results.append({
                "solver": name,
                "tau": None if tau is None else (m if tau == "m" else tau),
                "epochs_to_tol": [None if math.isinf(e) else e for e in per_trial],
                "median_epochs": None if math.isinf(med) else med,
                "converged": conv,
                "csv": files,
            })
    summary = {
        "problem": {"family": problem.family, "m": m, "n": problem.shape[1], "seed": problem.seed, **problem.meta},
        "objective": cfg.objective,
        "sampling": cfg.sampling,
        "rse_tol": rse_tol,
        "trials": cfg.trials,
        "results": results,
    }
    path = Path(f"{prefix}_summary.json")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    log.info("wrote %s", path)
    return summary


def cmd_certify(cfg: ExperimentConfig) -> dict:
    """Monte Carlo check of the per-iteration contraction bound."""
    if cfg.objective["kind"] != "quadratic":
        raise ConfigError("certify: nu unavailable for objective "
                          f"{cfg.objective['kind']!r}; only the quadratic objective has a closed form")
    f = _objective(cfg)
    problem = reference_solution(build_problem(cfg), "quadratic")
    c = cfg.certify
    method = c.get("method", "sdcd")
    zeta = float(c.get("zeta", 1.0))
    iters = int(c.get("iterations", 200))
    slack = float(c.get("slack", 0.02))
    tau = cfg.taus()[0] if cfg.sampling["kind"] in ("block_partition", "weighted_block") else None
    space = _space(cfg, problem, tau, 0)
    cert = rate_certificate(f, problem.A, space, zeta, method)
    opts = SolveOptions(zeta=zeta, rse_tol=0.0, max_epochs=math.inf, max_iters=iters)
    traces = []
    for t in range(cfg.trials):
        _, tr = solve(problem, f, space, opts, rng=stream(cfg.seed, t, 1), method=method)
        traces.append(tr)
    ratios = empirical_contraction(traces)
    finite = ratios[np.isfinite(ratios)]
    emp = float(finite.max()) if finite.size else 0.0
    passed = emp <= cert.contraction_factor + slack
    report = {
        "method": method,
        "gamma": cert.gamma,
        "zeta": cert.zeta,
        "nu": cert.nu,
        "lambda_min_H": cert.lambda_min_H,
        "lambda_max": cert.lambda_max_k,
        "theoretical_factor": cert.contraction_factor,
        "empirical_max": emp,
        "slack": slack,
        "trials": cfg.trials,
        "iterations": iters,
        "pass": bool(passed),
    }
    return report


def cmd_plotdata(prefix: str) -> list[Path]:
    base = Path(prefix)
    out = []
    for csv_path in sorted(base.parent.glob(base.name + "*.csv")):
        out.append(fio.write_gnuplot(fio.read_trace_csv(csv_path), csv_path.with_suffix(".dat")))
    return out


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fsdcd", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("generate", "run", "certify"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="TOML experiment file")
        sp.add_argument("--seed", type=int, help="override problem.seed (master seed)")
        sp.add_argument("--out", help="output path prefix")
        sp.add_argument("--quiet", action="store_true")
    sp = sub.add_parser("plotdata")
    sp.add_argument("--out", required=True, help="prefix used by a previous run")
    sp.add_argument("--quiet", action="store_true")
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")
    try:
        if args.command == "plotdata":
            for p in cmd_plotdata(args.out):
                log.info("wrote %s", p)
            return 0
        cfg = ExperimentConfig.load(args.config)
        if args.seed is not None:
            cfg.problem["seed"] = args.seed
        if args.command == "generate":
            cmd_generate(cfg, args.out)
            return 0
        if args.command == "run":
            summary = cmd_run(cfg, args.out)
            for r in summary["results"]:
                tag = r["solver"] if r["tau"] is None else f"{r['solver']} tau={r['tau']}"
                log.info("%-18s median epochs to tol: %s", tag, r["median_epochs"])
            return 0
        report = cmd_certify(cfg)
        if not args.quiet:
            for k, v in report.items():
                print(f"{k:>20}: {v}")
        print("PASS" if report["pass"] else "FAIL")
        return 0 if report["pass"] else 1
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
