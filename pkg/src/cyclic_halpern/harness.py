"""Experiment configs, end-to-end verification, and the command-line entry point.

An experiment config is one JSON document::

    {
      "space": {"kind": "euclidean", "dim": 2},
      "family": [{"kind": "rotation", "angle": 0.7}, {"kind": "rotation", "angle": 1.1}],
      "schedule": {"kind": "harmonic"},
      "kind": "halpern",
      "u": [1.0, 0.0],
      "M": 2.0,
      "n_max": 1100,
      "epsilon_grid": [8.0],
      "seed": 0
    }

``n_max`` may be ``"auto"`` (run just far enough for every feasible
epsilon). An optional ``"domain": {"center": [...], "radius": r}`` restricts
the maps to a working ball.

Subcommands: ``run``, ``certify``, ``verify``, ``check-space`` and
``check-schedule``. The worker count for lists of experiments is read from
``CYCLIC_HALPERN_WORKERS`` (default 1); report order never depends on it.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._numeric import TOL
from .errors import ConfigError, CyclicHalpernError
from .iterations import IterationKind, lemma42_check, residuals, run, shift_gaps
from .mappings import family_from_descriptors
from .rates import RUN_BUDGET, RateQuery, certify
from .schedules import (
    schedule_from_descriptor,
    validate_cauchy_modulus,
    validate_divergence_modulus,
    validate_vanishing_modulus,
)
from .spaces import Sphere, check_rdelta_convexity, check_spherical_comparison, space_from_descriptor

__all__ = [
    "ExperimentConfig",
    "ExperimentResult",
    "load_config",
    "run_experiment",
    "certify_table",
    "check_space",
    "check_schedule",
    "write_trace_csv",
    "main",
]

WORKERS_ENV = "CYCLIC_HALPERN_WORKERS"
CSV_HEADER = ("n", "lambda_n", "shift_gap_N", "residual")
NOT_EXECUTED = "certified, not executed"


def _require(d, key):
    if key not in d:
        raise ConfigError(f"config is missing {key!r}")
    return d[key]


@dataclass
class ExperimentConfig:
    space: dict
    family: list
    schedule: dict
    kind: str
    u: list
    M: float
    n_max: int | str
    epsilon_grid: list = field(default_factory=list)
    seed: int = 0
    domain: dict | None = None
    budget: int = RUN_BUDGET

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise ConfigError("an experiment config must be a JSON object")
        family = _require(d, "family")
        if not isinstance(family, list) or not family:
            raise ConfigError("'family' must be a nonempty list of map descriptors")
        n_max = _require(d, "n_max")
        if n_max != "auto" and (not isinstance(n_max, int) or n_max < 0):
            raise ConfigError("'n_max' must be a nonnegative integer or \"auto\"")
        grid = d.get("epsilon_grid", [])
        if any(not (isinstance(e, int | float) and e > 0) for e in grid):
            raise ConfigError("'epsilon_grid' entries must be positive numbers")
        M = _require(d, "M")
        if not (isinstance(M, int | float) and M > 0):
            raise ConfigError("'M' must be a positive number")
        return cls(
            space=_require(d, "space"),
            family=family,
            schedule=_require(d, "schedule"),
            kind=IterationKind.parse(_require(d, "kind")).value,
            u=_require(d, "u"),
            M=float(M),
            n_max=n_max,
            epsilon_grid=[float(e) for e in grid],
            seed=int(d.get("seed", 0)),
            domain=d.get("domain"),
            budget=int(d.get("budget", RUN_BUDGET)),
        )

    def build(self):
        """Resolve descriptors into ``(space, family, schedule)``."""
        try:
            space = space_from_descriptor(self.space)
            family = family_from_descriptors(self.family, space, self.domain)
            schedule = schedule_from_descriptor(self.schedule)
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"bad descriptor: {exc}") from exc
        if 2.0 * self.M > space.certificate.r + TOL:
            raise ConfigError(f"2M = {2 * self.M:.6g} exceeds r = {space.certificate.r:.6g}")
        return space, family, schedule


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    trace: object
    family: object
    report: dict

    @property
    def passed(self):
        return bool(self.report["pass"])


def _certificates(cfg, space, family, schedule):
    delta = space.certificate.delta
    return [certify(RateQuery(e, cfg.M, family.N, delta), schedule, cfg.budget) for e in cfg.epsilon_grid]


def _needed_length(cert, N):
    top = cert.phi_tilde + N
    if cert.phi is not None:
        top = max(top, cert.phi)
    return top


def _schedule_checks(cfg, family, schedule, certs, n_max):
    N = family.N
    out = {}
    thetas = [m for m in range(1, 64) if schedule.theta(m) <= max(n_max, 1)]
    if thetas:
        out["divergence"] = validate_divergence_modulus(schedule, max(thetas)).to_dict()
    eps_g = sorted({c.epsilon / (4.0 * cfg.M) for c in certs} | {c.epsilon / (8.0 * cfg.M) for c in certs})
    if eps_g:
        out["cauchy"] = validate_cauchy_modulus(schedule, N, eps_g, max(n_max, 1)).to_dict()
    if schedule.alpha is not None and certs:
        eps_a = [c.epsilon / (4.0 * cfg.M * N) for c in certs]
        horizon = max([n_max] + [schedule.alpha(e) for e in eps_a])
        out["vanishing"] = validate_vanishing_modulus(schedule, eps_a, horizon).to_dict()
    return out


def run_experiment(config):
    """Run one experiment and tie its trace to the rate certificates.

    For every feasible epsilon the shift gap is evaluated at ``phi_tilde``
    and the residual at ``phi``; each must be at most ``epsilon`` (1e-9
    slack) there and at every later recorded index. Epsilons whose
    certified index lies beyond the run are reported as
    ``"certified, not executed"``. The report also carries the trace
    inequality check and the schedule modulus validators.
    """
    cfg = config if isinstance(config, ExperimentConfig) else ExperimentConfig.from_dict(config)
    space, family, schedule = cfg.build()
    N = family.N
    certs = _certificates(cfg, space, family, schedule)

    if cfg.n_max == "auto":
        lengths = [_needed_length(c, N) for c in certs if c.feasible]
        n_max = max(lengths, default=N)
    else:
        n_max = cfg.n_max

    trace = run(cfg.kind, family, schedule, cfg.u, cfg.M, n_max)
    gaps = shift_gaps(trace, N) if n_max >= N else np.empty(0)

    entries = []
    for cert in certs:
        entry = {"epsilon": cert.epsilon, **{k: v for k, v in cert.to_dict().items() if k != "epsilon"}}
        if not cert.feasible or _needed_length(cert, N) > n_max:
            entry.update(status=NOT_EXECUTED, certified_index=cert.phi, empirical_value_at_index=None, **{"pass": None})
            entries.append(entry)
            continue
        eps = cert.epsilon
        g_tail = gaps[cert.phi_tilde :]
        entry.update(
            status="verified",
            shift_gap_index=cert.phi_tilde,
            shift_gap_at_index=float(gaps[cert.phi_tilde]),
            shift_gap_tail_max=float(np.max(g_tail)),
        )
        ok = entry["shift_gap_tail_max"] <= eps + TOL
        if cert.phi is not None:
            res_tail = residuals(trace, family, np.arange(cert.phi, n_max + 1))
            entry.update(
                certified_index=cert.phi,
                empirical_value_at_index=float(res_tail[0]),
                residual_tail_max=float(np.max(res_tail)),
            )
            ok = ok and entry["residual_tail_max"] <= eps + TOL
        else:
            entry.update(certified_index=None, empirical_value_at_index=None)
        entry["pass"] = bool(ok)
        entries.append(entry)

    ineq = lemma42_check(trace, family)
    sched = _schedule_checks(cfg, family, schedule, [c for c in certs if c.feasible], n_max)
    passed = (
        all(e["pass"] is not False for e in entries)
        and ineq.passed
        and all(r["pass"] for r in sched.values())
    )
    report = {
        "space": space.descriptor(),
        "certificate": {"r": _json_float(space.certificate.r), "delta": space.certificate.delta},
        "family": family.descriptor(),
        "schedule": schedule.descriptor(),
        "kind": cfg.kind,
        "M": cfg.M,
        "N": N,
        "n_max": n_max,
        "epsilons": entries,
        "trace_inequalities": ineq.to_dict(),
        "schedule_checks": sched,
        "pass": bool(passed),
    }
    return ExperimentResult(cfg, trace, family, report)


def _json_float(x):
    return "inf" if x == math.inf else x


def write_trace_csv(result, fh):
    """Write ``n,lambda_n,shift_gap_N,residual``; cells without a value are left empty."""
    trace, family = result.trace, result.family
    N = family.N
    K = trace.n_max
    gaps = shift_gaps(trace, N) if K >= N else np.empty(0)
    res = residuals(trace, family)
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for n in range(K + 1):
        w.writerow(
            (
                n,
                repr(float(trace.lambdas[n - 1])) if n >= 1 else "",
                repr(float(gaps[n])) if n < gaps.size else "",
                repr(float(res[n])),
            )
        )


def certify_table(d):
    """Certificates for ``{epsilon_grid, M, N, delta, schedule}`` (or a full experiment config)."""
    if "space" in d:
        space = space_from_descriptor(d["space"])
        delta = space.certificate.delta
        N = len(d["family"]) if "family" in d else int(d.get("N", 1))
    else:
        delta = float(d.get("delta", 0.0))
        N = int(_require(d, "N"))
    schedule = schedule_from_descriptor(_require(d, "schedule"))
    budget = int(d.get("budget", RUN_BUDGET))
    M = float(_require(d, "M"))
    return [certify(RateQuery(float(e), M, N, delta), schedule, budget) for e in _require(d, "epsilon_grid")]


def format_certify_table(certs):
    rows = [("epsilon", "phi_tilde", "phi", "psi", "feasible")]
    for c in certs:
        rows.append(
            (
                f"{c.epsilon:g}",
                str(c.phi_tilde),
                "-" if c.phi is None else str(c.phi),
                "-" if c.psi is None else str(c.psi),
                "yes" if c.feasible else "no",
            )
        )
    widths = [max(len(r[i]) for r in rows) for i in range(5)]
    return "\n".join(" | ".join(cell.rjust(w) for cell, w in zip(r, widths)) for r in rows)


def check_space(d):
    """Sampling checks of the space certificate and of each map's nonexpansiveness."""
    from .mappings import check_nonexpansive

    space = space_from_descriptor(_require(d, "space"))
    samples = int(d.get("samples", 10_000))
    seed = int(d.get("seed", 0))
    out = {"space": space.descriptor(), "rdelta": check_rdelta_convexity(space, samples, seed).to_dict()}
    if isinstance(space, Sphere):
        out["spherical_comparison"] = check_spherical_comparison(space.kappa, space.mu, samples, seed).to_dict()
    if d.get("family"):
        family = family_from_descriptors(d["family"], space, d.get("domain"))
        if family.domain is not None:
            center, radius = family.domain.center, family.domain.radius
        else:
            center = getattr(space, "base", space.origin)
            r = space.certificate.r
            radius = min(float(d.get("M", 1.0)), r / 2.0)
        out["maps"] = [
            {"map": m.descriptor(), **check_nonexpansive(m, center, radius, samples, seed + i).to_dict()}
            for i, m in enumerate(family.maps)
        ]
        window = check_nonexpansive(
            lambda x: family.compose_window(0, x), center, radius, samples, seed, space=space
        )
        out["window"] = window.to_dict()
    out["pass"] = all(
        v["pass"] for k, v in out.items() if isinstance(v, dict) and "pass" in v
    ) and all(m["pass"] for m in out.get("maps", []))
    return out


def check_schedule(d):
    """Run the three modulus validators; ``N`` is taken from ``family`` when present."""
    schedule = schedule_from_descriptor(_require(d, "schedule"))
    N = len(d["family"]) if "family" in d else int(d.get("N", 1))
    grid = [float(e) for e in d.get("check_epsilon_grid", [1.0, 0.5, 0.25, 0.1])]
    m_max = int(d.get("m_max", 6))
    horizon = int(d.get("horizon", 10**6))
    out = {
        "schedule": schedule.descriptor(),
        "N": N,
        "divergence": validate_divergence_modulus(schedule, m_max).to_dict(),
        "cauchy": validate_cauchy_modulus(schedule, N, grid, horizon).to_dict(),
    }
    if schedule.alpha is not None:
        out["vanishing"] = validate_vanishing_modulus(schedule, grid, horizon).to_dict()
    out["pass"] = all(v["pass"] for v in out.values() if isinstance(v, dict) and "pass" in v)
    return out


def _verify_one(d):
    return run_experiment(d).report


def _workers():
    try:
        return max(int(os.environ.get(WORKERS_ENV, "1")), 1)
    except ValueError:
        return 1


def _emit(text, path):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parser():
    p = argparse.ArgumentParser(
        prog="cyclic-halpern",
        description="Cyclic Halpern iterations with certified rates of asymptotic regularity.",
    )
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in [
        ("run", "run an experiment and write the trace CSV"),
        ("certify", "print certified indices for an epsilon grid"),
        ("verify", "run an experiment and check it against its certificates"),
        ("check-space", "sample the convexity and nonexpansiveness certificates"),
        ("check-schedule", "validate the step-size moduli"),
    ]:
        s = sub.add_parser(name, help=help_)
        s.add_argument("config", help="path to a JSON config")
        s.add_argument("-o", "--output", help="write to this file instead of stdout")
        if name == "verify":
            s.add_argument("--csv", help="also write the trace CSV here")
    return p


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        d = load_config(args.config)
        if args.command == "run":
            result = run_experiment(d)
            buf = io.StringIO()
            write_trace_csv(result, buf)
            _emit(buf.getvalue(), args.output)
            return 0
        if args.command == "certify":
            certs = certify_table(d)
            _emit(format_certify_table(certs) + "\n", args.output)
            return 0
        if args.command == "verify":
            if isinstance(d, list):
                workers = _workers()
                if workers == 1:
                    reports = [_verify_one(x) for x in d]
                else:
                    with ProcessPoolExecutor(max_workers=workers) as pool:
                        reports = list(pool.map(_verify_one, d))
                _emit(json.dumps(reports, indent=2) + "\n", args.output)
                return 0 if all(r["pass"] for r in reports) else 1
            result = run_experiment(d)
            if args.csv:
                with open(args.csv, "w", encoding="utf-8", newline="") as fh:
                    write_trace_csv(result, fh)
            _emit(json.dumps(result.report, indent=2) + "\n", args.output)
            return 0 if result.passed else 1
        if args.command == "check-space":
            out = check_space(d)
        else:
            out = check_schedule(d)
        _emit(json.dumps(out, indent=2) + "\n", args.output)
        return 0 if out["pass"] else 1
    except (CyclicHalpernError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
