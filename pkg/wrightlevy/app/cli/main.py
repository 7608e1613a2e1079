"""
wrightlevy command line

    wrightlevy eval psi_gamma --alpha 1.5 --gamma 0 --lambda 1
    wrightlevy table density --alpha 1.5 --delta 0.8 --ymin 0.1 --ymax 50 --n 200 --log
    wrightlevy simulate expfun_mc --alpha 1.5 --gamma 0 --n_paths 10000
    wrightlevy invert entrance --kappa 0.5 --delta 0.8 --t 1 --ymin 0.1 --ymax 5 --n 20
    wrightlevy verify all --seed 42

Exit codes: 0 success, 2 validation or configuration, 3 precision or other
numerical failure, 4 oracle mismatch.
"""
import argparse
import sys
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from wrightlevy import __version__
from wrightlevy.app.cli import tables
from wrightlevy.app.cli.validators import load_config_section, validate_model_input
from wrightlevy.app.core.config import settings
from wrightlevy.app.core.exceptions import (
    ConfigError,
    DomainError,
    OracleMismatchError,
    PoleError,
    WrightLevyError,
)
from wrightlevy.app.core.logging import get_logger, run_context, setup_logging
from wrightlevy.app.schemas.command import PARAM_TYPES, TARGETS, Command, Format, Target, Verb
from wrightlevy.app.schemas.params import CbiParams, FamilyParams
from wrightlevy.app.schemas.sim import Direction, SimConfig
from wrightlevy.app.schemas.wright import Method, WrightSpec
from wrightlevy.app.services import cbi, expfun, levy, sim, verification
from wrightlevy.app.services.wright import wright_eval

logger = get_logger("wrightlevy.app.cli")

EXIT_OK, EXIT_CONFIG, EXIT_PRECISION, EXIT_ORACLE = 0, 2, 3, 4
CLOSED_FORM_REL = 8 * np.finfo(float).eps

Envelope = Dict[str, Any]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=settings.PROJECT_NAME,
        description="Wright functions, Levy exponential functionals and self-similar CBI laws",
        allow_abbrev=False,
    )
    parser.add_argument("verb", choices=[v.value for v in Verb])
    parser.add_argument("target", choices=[t.value for t in Target])
    parser.add_argument("--config", help="INI file with a [<verb> <target>] or [<target>] section")
    parser.add_argument("-o", "--output", help="Output file (default: stdout)")
    parser.add_argument("--format", choices=[f.value for f in Format])
    parser.add_argument("--log-level", default=None, help="Log level (default: LOG_LEVEL)")
    parser.add_argument("--log-dir", default=None, help="Also write rotating log files here")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")

    params = parser.add_argument_group("parameters")
    for key in PARAM_TYPES:
        if key == "log":
            params.add_argument("--log", dest="p_log", action="store_const", const=True, default=None,
                                help="Logarithmic grid")
        else:
            params.add_argument(f"--{key}", dest=f"p_{key}", default=None)
    for var in sorted({spec.point for spec in TARGETS.values() if spec.point}):
        params.add_argument(f"--{var}min", dest=f"p_{var}min", default=None)
        params.add_argument(f"--{var}max", dest=f"p_{var}max", default=None)
    return parser


def parse_command(argv: Optional[Sequence[str]] = None) -> tuple:
    """(Command, parsed args); flags override the config file"""
    args = build_parser().parse_args(argv)
    merged: Dict[str, Any] = load_config_section(args.config, args.verb, args.target)
    flags = {k[2:]: v for k, v in vars(args).items() if k.startswith("p_") and v is not None}
    merged.update(flags)
    verb = Verb(args.verb)
    if verb in (Verb.SIMULATE, Verb.VERIFY) and "seed" not in merged:
        merged["seed"] = settings.WRIGHTLEVY_SEED
    fmt = args.format or (Format.JSON.value if verb in (Verb.EVAL, Verb.VERIFY) else Format.CSV.value)
    cmd = validate_model_input(
        Command,
        {"verb": args.verb, "target": args.target, "params": merged, "output": args.output, "format": fmt},
    )
    return cmd, args


def _family(cmd: Command) -> FamilyParams:
    data = {"alpha": cmd.get("alpha"), "gamma": cmd.get("gamma"), "delta": cmd.get("delta")}
    return validate_model_input(FamilyParams, data)


def _cbi(cmd: Command, delta: Optional[float] = None) -> CbiParams:
    data = {"kappa": cmd.get("kappa"), "delta": cmd.get("delta", 0.0) if delta is None else delta}
    if cmd.get("c") is not None:
        data["c"] = cmd.get("c")
    return validate_model_input(CbiParams, data)


def _closed(value: float) -> Envelope:
    return tables.envelope(value, CLOSED_FORM_REL * abs(value), "closed_form")


def point_evaluator(cmd: Command) -> Callable[[float], Envelope]:
    """Value at the target's point variable, with all other parameters bound"""
    target = cmd.target
    tol = cmd.get("tol")
    if target is Target.PSI_GAMMA:
        p = _family(cmd)
        return lambda lam: _closed(levy.psi_gamma(p, lam))
    if target is Target.PSI_DELTA:
        p = _family(cmd)
        return lambda lam: _closed(levy.psi_delta(p, lam))
    if target is Target.WRIGHT:
        spec = validate_model_input(WrightSpec, {"upper": cmd.get("upper", ()), "lower": cmd.get("lower", ())})
        return lambda x: wright_eval(spec, x, tol).envelope()
    if target is Target.DENSITY:
        law = expfun.ExpFunctionalLaw(_family(cmd), check_mass=False)
        return lambda y: expfun.density_eval(law, y, tol).envelope()
    if target is Target.LAPLACE_N:
        p = _family(cmd)
        return lambda x: expfun.laplace_N_eval(p, x, tol).envelope()
    if target is Target.TRANSITION:
        p = _cbi(cmd)
        t, x = cmd.get("t"), cmd.get("x")
        tol_t = tol if tol is not None else 1e-10

        def transition(y: float) -> Envelope:
            value = cbi.transition_density(p, t, x, y, tol_t)
            return tables.envelope(value, tol_t * abs(value), Method.SERIES.value)

        return transition
    if target is Target.ENTRANCE:
        p = _cbi(cmd)
        t = cmd.get("t")
        tol_e = tol if tol is not None else 1e-10

        def entrance(y: float) -> Envelope:
            value = cbi.entrance_density(p, t, y, tol_e)
            return tables.envelope(value, tol_e * abs(value), Method.SERIES.value)

        return entrance
    if target is Target.FIRST_PASSAGE:
        p = _cbi(cmd, delta=0.0)
        x, a = cmd.get("x"), cmd.get("a")

        def first_passage(q: float) -> Envelope:
            value = cbi.first_passage_laplace(p, q, x, a)
            return tables.envelope(value, 1e-10 * abs(value), Method.QUADRATURE.value)

        return first_passage
    if target is Target.IDENTITY:
        alpha, g = cmd.get("alpha"), cmd.get("gamma")

        def identity(lam: float) -> Envelope:
            lhs, rhs = levy.verify_integral_identity(alpha, g, lam)
            return tables.envelope(lhs, abs(lhs - rhs), Method.QUADRATURE.value, rhs=rhs)

        return identity
    raise ConfigError(f"no point evaluation for {target.value}")


def _grid(cmd: Command, var: str) -> np.ndarray:
    lo, hi, n = cmd.get(f"{var}min"), cmd.get(f"{var}max"), cmd.get("n")
    if cmd.get("log", False):
        if lo <= 0 or hi <= 0:
            raise ConfigError(f"log grid needs positive {var}min and {var}max")
        return np.geomspace(lo, hi, n)
    return np.linspace(lo, hi, n)


def _meta(cmd: Command, **extra: Any) -> Dict[str, Any]:
    return {
        "wrightlevy": __version__,
        "verb": cmd.verb.value,
        "target": cmd.target.value,
        "params": cmd.params,
        "seed": cmd.get("seed"),
        **extra,
    }


def _emit(cmd: Command, df: pd.DataFrame, meta: Dict[str, Any]) -> None:
    if cmd.format is Format.CSV:
        tables.write_text(tables.format_table(df, meta), cmd.output)
    else:
        tables.write_text(tables.dumps({"meta": meta, "rows": df.to_dict(orient="records")}), cmd.output)


def run_eval(cmd: Command) -> int:
    var = TARGETS[cmd.target].point
    result = point_evaluator(cmd)(cmd.get(var))
    if cmd.format is Format.JSON:
        tables.write_text(tables.dumps(result), cmd.output)
    else:
        _emit(cmd, pd.DataFrame([{var: cmd.get(var), **result}]), _meta(cmd))
    return EXIT_OK


def run_table(cmd: Command) -> int:
    var = TARGETS[cmd.target].point
    evaluate = point_evaluator(cmd)
    rows = [{var: float(v), **evaluate(float(v))} for v in _grid(cmd, var)]
    _emit(cmd, pd.DataFrame(rows), _meta(cmd))
    return EXIT_OK


def run_simulate(cmd: Command) -> int:
    cfg_keys = ("n_paths", "eps_jump", "step", "horizon", "seed")
    cfg = validate_model_input(SimConfig, {k: cmd.get(k) for k in cfg_keys if cmd.get(k) is not None})
    if cmd.target is Target.EXPFUN_MC:
        p = _family(cmd)
        default = Direction.PLUS_KAPPA if cmd.get("delta") is not None else Direction.MINUS_KAPPA
        try:
            direction = Direction(cmd.get("direction", default.value))
        except ValueError:
            raise ConfigError(f"direction must be one of {[d.value for d in Direction]}") from None
        samples = sim.sample_exponential_functional(p, direction, cfg)
    else:
        samples = sim.sample_absorption_time(_cbi(cmd, delta=0.0), cmd.get("x"), cfg)
    _emit(cmd, pd.DataFrame({"value": samples.values}), _meta(cmd, **samples.meta))
    return EXIT_OK


def run_invert(cmd: Command) -> int:
    p = _cbi(cmd)
    t = cmd.get("t")
    x = cmd.get("x", 0.0) if cmd.target is Target.TRANSITION else 0.0
    s = p.c * t

    def F(lam: complex) -> complex:
        base = 1.0 + s * lam**p.kappa
        return base ** (-p.D) * np.exp(-x * lam * base ** (-1.0 / p.kappa))

    grid = _grid(cmd, "y")
    nodes = cmd.get("nodes", 24)
    values = sim.laplace_invert(F, grid, n_nodes=nodes)
    df = pd.DataFrame({"y": grid, "value": values})
    _emit(cmd, df, _meta(cmd, method="fixed_talbot", nodes=2 * nodes))
    return EXIT_OK


def run_verify(cmd: Command) -> int:
    names = verification.GROUPS[cmd.target.value]
    try:
        results = verification.run_checks(names, cmd.get("seed"))
    except OracleMismatchError as exc:
        tables.write_text(tables.dumps([r.model_dump() for r in exc.results]), cmd.output)
        raise
    tables.write_text(tables.dumps([r.model_dump() for r in results]), cmd.output)
    return EXIT_OK


RUNNERS: Dict[Verb, Callable[[Command], int]] = {
    Verb.EVAL: run_eval,
    Verb.TABLE: run_table,
    Verb.SIMULATE: run_simulate,
    Verb.INVERT: run_invert,
    Verb.VERIFY: run_verify,
}


def run(cmd: Command) -> int:
    with run_context(f"{cmd.verb.value} {cmd.target.value}", cmd.get("seed")):
        logger.info(f"parameters {cmd.params}")
        return RUNNERS[cmd.verb](cmd)


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, (ConfigError, DomainError, PoleError)):
        return EXIT_CONFIG
    if isinstance(exc, OracleMismatchError):
        return EXIT_ORACLE
    return EXIT_PRECISION


def main(argv: Optional[List[str]] = None) -> int:
    try:
        cmd, args = parse_command(argv)
    except ConfigError as exc:
        setup_logging(log_to_file=False)
        for line in exc.errors or [str(exc)]:
            logger.error(line)
        return EXIT_CONFIG
    setup_logging(log_level=args.log_level, log_to_file=args.log_dir is not None, log_dir=args.log_dir)
    try:
        return run(cmd)
    except ConfigError as exc:
        for line in exc.errors or [str(exc)]:
            logger.error(line)
        return EXIT_CONFIG
    except (WrightLevyError, OverflowError) as exc:
        logger.error(f"{type(exc).__name__}: {exc}")
        return exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
