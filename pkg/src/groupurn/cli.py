"""Command-line front end: ``groupurn <subcommand> [flags]``.

Every flag can also come from a JSON config file (``--config``) whose keys
are the flag names with dashes replaced by underscores; flags on the command
line win.  See ``configs/example.json`` for an annotated example.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from . import __version__
from .groups import GroupAxiomError, CayleyFormatError, group_from_spec, subgroup_generated, is_subgroup
from .outputs import dump_json, meta_path, write_atomic
from .seeding import fresh_seed

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_GROUP = 4
EXIT_SUPPORT = 5
EXIT_IO = 6
EXIT_VERDICT = 7
EXIT_INTERNAL = 1

EPILOG = """exit codes:
  0  success
  1  unexpected internal error
  2  usage error (bad or unknown flag, arity mismatch)
  3  parameter outside its domain
  4  invalid group table (Latin square, identity, inverse or associativity failure)
  5  exact support too large
  6  output could not be written (no partial file is left)
  7  a verification verdict failed
"""


class UsageError(Exception):
    pass


class DomainError(UsageError):
    """A flag value is well-formed but outside its documented domain."""


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


# name -> (type, help)
FLAGS = {
    "group": (str, "group spec: cyclic:N, symmetric:N (N<=6), dihedral:N, klein, product:A*B, file:PATH"),
    "initial": (_ints, "initial counts n_0,...,n_{d-1} (non-negative, total >= 1)"),
    "balls": (_ints, "initial balls as element indices, e.g. 1,3 (alternative to --initial)"),
    "horizon": (int, "final number of balls (> initial total)"),
    "steps": (int, "number of exact steps (>= 0)"),
    "schedule": (str, "snapshot times: linear:S, geometric:B or times:T1,T2,..."),
    "trials": (int, "number of independent trials (>= 1)"),
    "statistic": (str, "tv, min_density, max_density, min_count or density:I"),
    "seed": (int, "master seed (non-negative integer); generated and printed if omitted"),
    "workers": (int, "worker threads (>= 1); never changes results"),
    "out": (str, "output path; CSV outputs get a PATH.meta.json sidecar; stdout if omitted"),
    "mode": (str, "arithmetic for exact: exact (rationals) or float"),
    "alpha": (float, "density floor alpha in (0, 1/d)"),
    "r": (float, "time ratio r in (1, 2 - alpha d)"),
    "delta_target": (float, "Chernoff fraction delta in (0, 1)"),
    "alpha_free": (bool, "use the alpha-free gamma construction"),
    "T": (int, "starting time T for the amplification experiment"),
    "mu": (float, "Bernoulli success probability in (0, 1]"),
    "delta": (float, "Chernoff threshold fraction in (0, 1)"),
    "t": (int, "number of Bernoulli trials per sum (>= 0)"),
    "subgroup": (_ints, "proper subgroup H as element indices (must contain the identity)"),
    "p": (int, "prime field size"),
    "generators": (_ints, "generating set S as element indices"),
    "weights": (_floats, "weights of the moves sx, s^-1x, x+as (three non-negative numbers)"),
    "x0": (_ints, "start element coefficients in [0, p)"),
    "samples": (int, "number of recorded samples (>= 1)"),
    "thinning": (int, "steps between samples (>= 1)"),
    "burn_in": (int, "steps (or time) discarded before sampling/fitting (>= 0)"),
    "base": (float, "geometric grid base (> 1)"),
    "num_states": (int, "number of random states (>= 1)"),
    "max_count": (int, "largest count in a random state (>= 1)"),
}

COMMANDS = {
    "simulate": (["group", "initial", "balls", "horizon", "schedule", "seed", "out"],
                 {"schedule": "linear:1"}),
    "exact": (["group", "initial", "balls", "steps", "mode", "out"], {"mode": "exact"}),
    "ensemble": (["group", "initial", "balls", "horizon", "schedule", "trials", "statistic", "seed",
                  "workers", "out"], {"schedule": "geometric:2", "statistic": "tv", "trials": 100}),
    "rate": (["group", "initial", "balls", "horizon", "base", "trials", "statistic", "burn_in", "seed",
              "workers", "out"], {"base": 2.0, "statistic": "tv", "trials": 100, "burn_in": 0}),
    "lemma31": (["group", "num_states", "max_count", "seed", "out"],
                {"num_states": 10000, "max_count": 30}),
    "lemma32": (["group", "alpha", "r", "delta_target", "alpha_free", "T", "trials", "seed", "workers",
                 "out"], {"delta_target": 0.9, "alpha_free": False}),
    "chernoff": (["mu", "delta", "t", "trials", "seed", "out"], {"trials": 100000}),
    "coupling": (["group", "subgroup", "initial", "balls", "horizon", "trials", "seed", "workers", "out"],
                 {"trials": 1000}),
    "support": (["group", "initial", "balls", "horizon", "trials", "seed", "workers", "out"],
                {"trials": 1000}),
    "fgwalk": (["group", "p", "generators", "weights", "x0", "samples", "thinning", "burn_in", "seed", "out"],
               {"weights": [1 / 3, 1 / 3, 1 / 3], "thinning": 50, "burn_in": 1000}),
    "validate-group": (["group", "out"], {}),
}

RANDOMIZED = {"simulate", "ensemble", "rate", "lemma31", "lemma32", "chernoff", "coupling", "support", "fgwalk"}

# Keys that never influence results and are kept out of provenance.
_NON_RESULT_KEYS = {"workers", "out"}


@dataclass
class ExperimentConfig:
    command: str
    group: str | None = None
    initial: list | None = None
    balls: list | None = None
    horizon: int | None = None
    steps: int | None = None
    schedule: str | None = None
    trials: int | None = None
    statistic: str | None = None
    seed: int | None = None
    workers: int | None = None
    out: str | None = None
    mode: str | None = None
    alpha: float | None = None
    r: float | None = None
    delta_target: float | None = None
    alpha_free: bool | None = None
    T: int | None = None
    mu: float | None = None
    delta: float | None = None
    t: int | None = None
    subgroup: list | None = None
    p: int | None = None
    generators: list | None = None
    weights: list | None = None
    x0: list | None = None
    samples: int | None = None
    thinning: int | None = None
    burn_in: int | None = None
    base: float | None = None
    num_states: int | None = None
    max_count: int | None = None

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        bad = sorted(set(doc) - known)
        if bad:
            raise UsageError(f"unknown config key(s): {', '.join(bad)}")
        return cls(**doc)

    def provenance(self) -> dict:
        return {k: v for k, v in self.to_dict().items() if k not in _NON_RESULT_KEYS}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="groupurn", description="Urn process on finite groups: simulation, exact law, "
                     "and bound checks.", epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"groupurn {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (flags, defaults) in COMMANDS.items():
        sp = sub.add_parser(name, epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
        sp.add_argument("--config", default=argparse.SUPPRESS, help="JSON config file; flags override its keys")
        for f in flags:
            typ, help_ = FLAGS[f]
            opt = "--" + f.replace("_", "-")
            if f in defaults:
                help_ += f" (default: {defaults[f]})"
            if typ is bool:
                sp.add_argument(opt, dest=f, action="store_true", default=argparse.SUPPRESS, help=help_)
            else:
                sp.add_argument(opt, dest=f, type=typ, default=argparse.SUPPRESS, help=help_)
    return parser


def parse_cli(argv) -> ExperimentConfig:
    """Parse arguments (and an optional config file) into a validated config."""
    ns = vars(build_parser().parse_args(argv))
    command = ns.pop("command")
    flags, defaults = COMMANDS[command]
    merged = dict(defaults)
    cfg_path = ns.pop("config", None)
    if cfg_path is not None:
        try:
            doc = json.loads(Path(cfg_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"--config: cannot read {cfg_path}: {exc}") from None
        if not isinstance(doc, dict):
            raise UsageError("--config: top level must be a JSON object")
        doc.pop("_comment", None)
        if doc.pop("command", command) != command:
            raise UsageError(f"--config: file is for a different subcommand than {command!r}")
        bad = sorted(set(doc) - set(flags))
        if bad:
            raise UsageError(f"--config: key(s) not valid for {command}: {', '.join(bad)}")
        merged.update({k: _coerce(k, v) for k, v in doc.items()})
    merged.update(ns)
    cfg = ExperimentConfig(command=command, **merged)
    _validate(cfg)
    return cfg


def _coerce(name: str, value):
    """Check a config-file value against its flag type; lists may also be
    given as comma-separated strings."""
    typ = FLAGS[name][0]
    bad = UsageError(f"--config: {name}={value!r} has the wrong type")
    if typ in (_ints, _floats):
        if isinstance(value, str):
            try:
                return typ(value)
            except argparse.ArgumentTypeError:
                raise bad from None
        if not isinstance(value, list) or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in value):
            raise bad
        if typ is _ints and any(not float(v).is_integer() for v in value):
            raise bad
        return [int(v) for v in value] if typ is _ints else [float(v) for v in value]
    if typ is bool:
        if not isinstance(value, bool):
            raise bad
        return value
    if typ is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise bad
        return value
    if typ is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise bad
        return float(value)
    if not isinstance(value, str):
        raise bad
    return value


def _require(cfg, *names):
    for n in names:
        if getattr(cfg, n) is None:
            raise UsageError(f"--{n.replace('_', '-')} is required for {cfg.command}")


def _validate(cfg: ExperimentConfig):
    flags = COMMANDS[cfg.command][0]
    if "group" in flags:
        _require(cfg, "group")
        try:
            g = group_from_spec(cfg.group)
        except (GroupAxiomError, CayleyFormatError):
            raise
        except (ValueError, OSError) as exc:
            raise DomainError(f"--group: {exc}") from None
        if cfg.initial is not None and cfg.balls is not None:
            raise UsageError("--initial and --balls are mutually exclusive")
        if cfg.initial is not None and len(cfg.initial) != g.order:
            raise UsageError(f"--initial: {len(cfg.initial)} counts given for a group of order {g.order}")
        if cfg.balls is not None and any(not 0 <= b < g.order for b in cfg.balls):
            raise DomainError(f"--balls: element index outside [0, {g.order})")
        for name in ("subgroup", "generators"):
            v = getattr(cfg, name)
            if v is not None and any(not 0 <= b < g.order for b in v):
                raise DomainError(f"--{name}: element index outside [0, {g.order})")
    if "initial" in flags and cfg.initial is None and cfg.balls is None:
        raise UsageError(f"--initial or --balls is required for {cfg.command}")
    for n in ("trials", "workers", "samples", "thinning", "num_states", "max_count", "horizon"):
        v = getattr(cfg, n)
        if v is not None and v < 1:
            raise DomainError(f"--{n.replace('_', '-')}: must be >= 1, got {v}")
    if cfg.seed is not None and cfg.seed < 0:
        raise DomainError(f"--seed: must be non-negative, got {cfg.seed}")
    if cfg.mode is not None and cfg.mode not in ("exact", "float"):
        raise DomainError(f"--mode: expected exact or float, got {cfg.mode!r}")
    required = {
        "simulate": ("horizon",), "exact": ("steps",), "ensemble": ("horizon",), "rate": ("horizon",),
        "lemma32": ("alpha", "r"), "chernoff": ("mu", "delta", "t"),
        "coupling": ("subgroup", "horizon"), "support": ("horizon",),
        "fgwalk": ("p", "generators", "samples"),
    }
    _require(cfg, *required.get(cfg.command, ()))


# ---------------------------------------------------------------------------
# dispatch


def _initial(cfg, group):
    from .urn import UrnState

    if cfg.initial is not None:
        return UrnState(tuple(cfg.initial))
    return UrnState.from_labels(group, cfg.balls)


def _meta(cfg: ExperimentConfig, extra: dict | None = None) -> dict:
    return {"version": __version__, "config": cfg.provenance(), "seed": cfg.seed, **(extra or {})}


def run(cfg: ExperimentConfig, stdout=None, stderr=None) -> int:
    """Execute a parsed config; returns the process exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    if cfg.command in RANDOMIZED and cfg.seed is None:
        cfg.seed = fresh_seed()
        print(f"NOTE: no --seed given; using generated seed {cfg.seed}", file=stderr)
    try:
        primary, meta, summary, ok = _dispatch(cfg)
    except Exception as exc:  # noqa: BLE001 - mapped to exit codes
        return _report(exc, stderr)

    if cfg.out is None:
        stdout.write(primary)
    else:
        files = {cfg.out: primary}
        if meta is not None:
            files[meta_path(cfg.out)] = dump_json(meta)
        try:
            write_atomic(files)
        except OSError as exc:
            print(f"OutputError: cannot write {cfg.out}: {exc}", file=stderr)
            return EXIT_IO
    seed = f" seed={cfg.seed}" if cfg.seed is not None else ""
    print(f"{cfg.command}: {summary}{seed}", file=stderr)
    return EXIT_OK if ok else EXIT_VERDICT


def _report(exc: Exception, stderr) -> int:
    """Print ``exc`` and return its exit code."""
    from .exact import SupportTooLarge

    if isinstance(exc, DomainError):
        code, name = EXIT_DOMAIN, "domain error"
    elif isinstance(exc, UsageError):
        code, name = EXIT_USAGE, "usage error"
    elif isinstance(exc, (GroupAxiomError, CayleyFormatError)):
        code, name = EXIT_GROUP, type(exc).__name__
    elif isinstance(exc, SupportTooLarge):
        code, name = EXIT_SUPPORT, "SupportTooLarge"
    elif isinstance(exc, ValueError):
        code, name = EXIT_DOMAIN, type(exc).__name__
    else:
        code, name = EXIT_INTERNAL, f"internal error: {type(exc).__name__}"
    print(f"{name}: {exc}", file=stderr)
    return code


def _dispatch(cfg: ExperimentConfig):
    """Returns ``(primary_text, sidecar_meta_or_None, summary, verdict_ok)``."""
    from . import algebra_walk, diagnostics, exact, lemmas
    from .urn import Schedule, simulate

    c = cfg.command
    if c == "chernoff":
        comp = lemmas.BernoulliComparison(cfg.mu, cfg.t, cfg.delta)
        rep = lemmas.bernoulli_tail_check(comp, cfg.trials, cfg.seed)
        doc = {**json.loads(rep.to_json()), **_meta(cfg)}
        return dump_json(doc), None, f"empirical={rep.empirical_failure:.6g} bound={rep.analytic_bound:.6g} " \
            f"verdict={rep.verdict}", rep.passed

    g = group_from_spec(cfg.group)
    if c == "validate-group":
        orders = sorted(g.element_order(i) for i in range(g.order))
        doc = {"order": g.order, "identity": g.identity, "labels": list(g.labels), "abelian": g.is_abelian(),
               "element_orders": orders, "inverse": g.inverse.tolist(), **_meta(cfg)}
        return dump_json(doc), None, f"valid group of order {g.order}", True

    if c == "lemma31":
        res = lemmas.check_lemma_3_1(g, cfg.num_states, cfg.seed, max_count=cfg.max_count)
        doc = {"lemma": "kernel-lower-bound", "states": res.states,
               "normalization_failures": res.normalization_failures, "bound_failures": res.bound_failures,
               "worst_slack": f"{res.worst_slack.numerator}/{res.worst_slack.denominator}",
               "worst_state": list(res.worst_state), "verdict": "pass" if res.passed else "fail", **_meta(cfg)}
        return dump_json(doc), None, f"failures={res.bound_failures} worst_slack={float(res.worst_slack):.6g}", \
            res.passed

    if c == "lemma32":
        plan = lemmas.plan_amplification(g.order, cfg.alpha, cfg.r, cfg.delta_target, bool(cfg.alpha_free))
        doc = {"plan": plan.as_dict(), **_meta(cfg)}
        ok = True
        summary = f"mu={float(plan.mu):.6f} gamma={float(plan.gamma):.6f}"
        if cfg.T is not None:
            if cfg.trials is None:
                raise UsageError("--trials is required with --T")
            rep = lemmas.run_amplification_experiment(g, plan, cfg.T, cfg.trials, cfg.seed, cfg.workers)
            doc["experiment"] = json.loads(rep.to_json())
            ok = rep.passed
            summary += f" empirical={rep.empirical_failure:.6g} bound={rep.analytic_bound:.6g} verdict={rep.verdict}"
        return dump_json(doc), None, summary, ok

    if c == "fgwalk":
        x0 = algebra_walk.GroupAlgebraElement(cfg.p, tuple(cfg.x0 or (0,) * g.order))
        if len(x0.coeffs) != g.order:
            raise UsageError(f"--x0: {len(x0.coeffs)} coefficients for a group of order {g.order}")
        wc = algebra_walk.WalkConfig(g, cfg.p, tuple(cfg.generators), tuple(cfg.weights))
        hist = algebra_walk.empirical_distribution(wc, x0, cfg.samples, cfg.thinning, cfg.burn_in, cfg.seed)
        meta = {**json.loads(hist.to_json()), **_meta(cfg)}
        return hist.to_csv(), meta, f"chi2={hist.chi2:.4f} dof={hist.dof}", True

    initial = _initial(cfg, g)
    if c == "simulate":
        tr = simulate(g, initial, cfg.horizon, Schedule.parse(cfg.schedule), cfg.seed)
        final = tr.final
        return tr.to_csv(), _meta(cfg), f"{len(tr)} snapshots, final counts {list(final.counts)}", True
    if c == "exact":
        dist = exact.evolve_exact(g, initial, cfg.steps, exact=cfg.mode == "exact")
        return dist.to_csv(), _meta(cfg), f"{len(dist)} states at t={dist.t}", True
    if c == "ensemble":
        summ = diagnostics.ensemble(g, initial, cfg.horizon, Schedule.parse(cfg.schedule), cfg.trials,
                                    cfg.statistic, cfg.seed, cfg.workers)
        return summ.to_csv(), _meta(cfg, {"statistic": cfg.statistic}), \
            f"{summ.trials} trials, final mean {cfg.statistic}={summ.mean[-1]:.6g}", True
    if c == "rate":
        fit = diagnostics.rate_scan(g, initial, cfg.horizon, cfg.trials, cfg.seed, base=cfg.base,
                                    burn_in=cfg.burn_in, statistic=cfg.statistic, workers=cfg.workers)
        doc = {**json.loads(fit.to_json()), **_meta(cfg)}
        return dump_json(doc), None, f"exponent={fit.exponent:.4f} residual={fit.residual:.3g}", True
    if c == "coupling":
        if not is_subgroup(g, cfg.subgroup):
            raise ValueError(f"--subgroup {cfg.subgroup} is not a subgroup")
        rep = lemmas.coupling_experiment(g, cfg.subgroup, initial, cfg.horizon, cfg.trials, cfg.seed,
                                         workers=cfg.workers)
        doc = {**json.loads(rep.to_json()), **_meta(cfg)}
        return dump_json(doc), None, f"violations={rep.details['dominance_violations']} " \
            f"exceeding={rep.details['fraction_exceeding']:.4f}", rep.passed
    if c == "support":
        labels = [i for i, n in enumerate(initial.counts) if n > 0]
        if len(subgroup_generated(g, labels)) != g.order:
            raise ValueError(f"initial labels {labels} do not generate the group")
        rep = lemmas.support_coverage_experiment(g, initial, cfg.trials, cfg.horizon, cfg.seed, cfg.workers)
        doc = {**json.loads(rep.to_json()), **_meta(cfg)}
        return dump_json(doc), None, f"covered={rep.details['fraction_covered']:.4f} " \
            f"median={rep.details['median_coverage_time']}", rep.passed
    raise UsageError(f"unknown command {c}")


def main(argv=None) -> int:
    try:
        cfg = parse_cli(sys.argv[1:] if argv is None else argv)
    except (UsageError, GroupAxiomError, CayleyFormatError) as exc:
        return _report(exc, sys.stderr)
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
