"""Batch front door: ``fg <group> <action> --config <file>``.

Subcommands
-----------
* ``fg space describe``  -- smoothness constant, effective curvature per N,
  measure statistics.
* ``fg flow run``        -- heat flow with observable series (CSV) and fitted
  decay rates checked against 2KN/(N-1) (JSON summary).
* ``fg ineq check``      -- the inequality checker matrix (JSON report).
* ``fg identities run``  -- identity residuals at two resolutions with
  convergence orders (JSON table).

Exit codes: 0 all checks passed, 1 some check failed, 2 invalid config,
3 runtime/solver error.  Outputs are deterministic for a fixed config and
seed: keys are sorted and floats rendered with 17 significant digits.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from .calculus import DiffOperators, operators_for
from .config import ConfigError, ExperimentConfig, load_config
from .curvature import admissible_N, effective_K
from .heatflow import FlowParams, check_dEdt_identity, decay_rates, evolve
from .inequalities import make_test_bank, run_checker_matrix
from .norms import uniform_smoothness
from .space import Domain, build_space, integrate

__all__ = ["main"]

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_BAD_CONFIG = 2
EXIT_RUNTIME = 3

ADJOINTNESS_TOL = 1e-13
ORDER_THRESHOLD = 1.8


# ----------------------------------------------------------------------
# deterministic JSON rendering

def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def render_json(obj, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = []
        for key in sorted(obj, key=str):
            items.append(f'{pad}  "{key}": {render_json(obj[key], indent + 1)}')
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{pad}  {render_json(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + f"\n{pad}]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    return '"' + str(obj).replace("\\", "\\\\").replace('"', '\\"') + '"'


def _num_key(N: float) -> str:
    if math.isinf(N):
        return "inf"
    return format(N, ".17g")


def _write(out_dir: str, name: str, text: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w") as fh:
        fh.write(text)
    return path


def _report_to_dict(rep) -> dict:
    return {
        "checker": rep.checker,
        "N": rep.N,
        "K": rep.K,
        "lhs": rep.lhs,
        "rhs": rep.rhs,
        "margin": rep.margin,
        "pass": rep.passed,
        "tol_rel": rep.tol_rel,
        "tol_abs": rep.tol_abs,
        "metadata": dict(rep.metadata),
    }


def _space_summary(config: ExperimentConfig, space, override_K=None) -> dict:
    k_eff = {}
    for N in config.n_values:
        if admissible_N(N, space.dim):
            k_eff[_num_key(N)] = (override_K if override_K is not None
                                  else effective_K(space, N).K_eff)
    mass = space.cell_mass
    return {
        "S_F": uniform_smoothness(space.norm),
        "K_eff": k_eff,
        "measure": {
            "nodes": space.n_nodes,
            "total_mass": float(mass.sum()),
            "min_cell_mass": float(mass.min()),
            "max_cell_mass": float(mass.max()),
        },
    }


# ----------------------------------------------------------------------
# subcommands

def cmd_space_describe(config: ExperimentConfig, out_dir: str, args) -> int:
    space = config.build_space()
    doc = {"config": config.raw, "space": _space_summary(config, space)}
    path = _write(out_dir, "describe.json", render_json(doc) + "\n")
    summary = doc["space"]
    print(f"S_F = {summary['S_F']:.6g}")
    for key, val in summary["K_eff"].items():
        print(f"K_eff(N={key}) = {val:.6g}")
    print(f"nodes = {summary['measure']['nodes']}, report -> {path}")
    return EXIT_OK


def cmd_flow_run(config: ExperimentConfig, out_dir: str, args) -> int:
    if config.flow is None:
        raise ConfigError("config key 'flow': required for `fg flow run`")
    space = config.build_space()
    ops = operators_for(space)
    u0 = space.field_from_expression(config.flow.u0)
    params = FlowParams(tau=config.flow.tau, t_end=config.flow.t_end,
                        tol=config.flow.tol, max_iter=config.flow.max_iter,
                        stride=config.flow.stride)
    states = evolve(ops, u0, params)

    lines = ["t,energy,variance,entropy,fisher"]
    for s in states:
        lines.append(",".join(format(v, ".17g") for v in
                              (s.t, s.energy, s.variance, s.entropy, s.fisher)))
    series_path = _write(out_dir, "flow_series.csv", "\n".join(lines) + "\n")

    rates = decay_rates(states) if len(states) >= 10 else {}
    bounds = {}
    all_pass = True
    for N in config.n_values:
        if not admissible_N(N, space.dim):
            continue
        K = effective_K(space, N).K_eff
        if K <= 0:
            continue
        bound = 2.0 * K if math.isinf(N) else 2.0 * K * N / (N - 1.0)
        entry = {"K": K, "rate_bound": bound}
        for name in ("variance_rate", "entropy_rate"):
            rate = rates.get(name)
            if rate is None or math.isnan(rate):
                entry[name] = rate
                entry[name.replace("_rate", "_pass")] = None
                continue
            ok = rate >= bound * 0.95
            entry[name] = rate
            entry[name.replace("_rate", "_pass")] = ok
            all_pass = all_pass and ok
        bounds[_num_key(N)] = entry

    doc = {"config": config.raw, "space": _space_summary(config, space),
           "rates": rates, "bounds": bounds,
           "mass_drift": abs(integrate(space, states[-1].u) - integrate(space, states[0].u))}
    summary_path = _write(out_dir, "flow_summary.json", render_json(doc) + "\n")
    print(f"series -> {series_path}\nsummary -> {summary_path}")
    for key, entry in bounds.items():
        print(f"N={key}: variance_rate={entry.get('variance_rate')} "
              f"bound={entry['rate_bound']:.6g} pass={entry.get('variance_pass')}")
    return EXIT_OK if all_pass else EXIT_CHECK_FAILED


def cmd_ineq_check(config: ExperimentConfig, out_dir: str, args) -> int:
    space = config.build_space()
    seed = args.seed if args.seed is not None else config.bank_seed
    bank = make_test_bank(space, seed=seed, size=config.bank_size)
    reports = []
    error = None
    # N values run one at a time so a checker error still leaves a partial
    # report on disk
    for N in config.n_values:
        try:
            reports.extend(run_checker_matrix(
                space, [N], checkers=config.checkers, bank=bank,
                override_K=args.override_k, tol_rel=config.tol_sweep))
        except Exception as exc:
            error = f"{type(exc).__name__}: {exc} (at N = {_num_key(N)})"
            break
    doc = {
        "config": config.raw,
        "seed": seed,
        "override_k": args.override_k,
        "space": _space_summary(config, space, override_K=args.override_k),
        "checks": [_report_to_dict(r) for r in reports],
        "identities": [],
        "error": error,
    }
    path = _write(out_dir, "ineq_report.json", render_json(doc) + "\n")
    n_fail = sum(not r.passed for r in reports)
    print(f"{len(reports)} checks, {n_fail} failed, report -> {path}")
    if error:
        print(f"aborted: {error}", file=sys.stderr)
        return EXIT_RUNTIME
    if n_fail:
        for r in reports:
            if not r.passed:
                print(f"FAIL {r.checker} N={_num_key(r.N)} member="
                      f"{r.metadata.get('member')} margin={r.margin:.3e}")
    return EXIT_OK if n_fail == 0 else EXIT_CHECK_FAILED


def _adjointness_residual(ops: DiffOperators, rng: np.random.Generator) -> float:
    space = ops.space
    worst = 0.0
    for _ in range(20):
        phi = rng.standard_normal(space.n_nodes)
        V = rng.standard_normal((space.n_nodes, space.dim))
        lhs = integrate(space, phi * ops.divergence(V))
        rhs = -integrate(space, np.einsum("mi,mi->m", ops.differential(phi), V))
        worst = max(worst, abs(lhs - rhs))
    return worst


def cmd_identities(config: ExperimentConfig, out_dir: str, args) -> int:
    if not config.domain.periodic:
        raise ConfigError("config key 'space.domain.geometry': identity suite "
                          "needs a periodic domain (circle or torus)")
    if config.domain.dim != 1:
        raise ConfigError("config key 'space.domain.geometry': identity suite "
                          "runs on circles")
    ident = config.identities
    results = {}
    L = config.domain.lengths[0]
    for res in ident.resolutions:
        domain = Domain(config.domain.geometry, config.domain.lengths, (res,))
        space = build_space(domain, config.norm, config.psi)
        ops = operators_for(space)
        if ident.h_expr is not None:
            h = space.field_from_expression(ident.h_expr)
        else:
            h = 0.3 * np.sin(2 * np.pi * space.coords[:, 0] / L)
        entry = {}
        for a in ident.a_values:
            entry[f"exp_chain(a={a:g})"] = ops.identity_exp_chain(h, a)
            entry[f"exp_gamma2(a={a:g})"] = ops.identity_exp_gamma2(h, a)
            entry[f"exp_bochner_integrals(a={a:g})"] = \
                ops.identity_exp_bochner_integrals(h, a)
        tau = 0.05 * space.h[0] ** 2
        u0 = 1.0 + 0.1 * np.sin(2 * np.pi * space.coords[:, 0] / L)
        params = FlowParams(tau=tau, t_end=5 * tau, tol=1e-13, stride=1)
        states = evolve(ops, u0, params)
        entry["dissipation"] = check_dEdt_identity(ops, states[-2:]).residual
        rng = np.random.default_rng(config.bank_seed)
        entry["adjointness"] = _adjointness_residual(ops, rng)
        results[res] = entry

    res_lo, res_hi = ident.resolutions
    table = []
    all_pass = True
    for name in sorted(results[res_lo]):
        r1, r2 = results[res_lo][name], results[res_hi][name]
        if name == "adjointness":
            passed = max(r1, r2) <= ADJOINTNESS_TOL
            table.append({"name": name, "residuals": [r1, r2],
                          "order": None, "pass": passed})
        else:
            order = math.log2(r1 / r2) if r2 > 0 else math.inf
            passed = order >= ORDER_THRESHOLD
            table.append({"name": name, "residuals": [r1, r2],
                          "order": order, "pass": passed})
        all_pass = all_pass and passed

    doc = {"config": config.raw, "resolutions": list(ident.resolutions),
           "space": _space_summary(config, space), "checks": [],
           "identities": table}
    path = _write(out_dir, "identities.json", render_json(doc) + "\n")
    for row in table:
        order = row["order"]
        otext = "exact" if order is None else f"order={order:.2f}"
        print(f"{'PASS' if row['pass'] else 'FAIL'} {row['name']}: "
              f"residuals {row['residuals'][0]:.3e} -> {row['residuals'][1]:.3e} ({otext})")
    print(f"report -> {path}")
    return EXIT_OK if all_pass else EXIT_CHECK_FAILED


# ----------------------------------------------------------------------

_COMMANDS = {
    ("space", "describe"): cmd_space_describe,
    ("flow", "run"): cmd_flow_run,
    ("ineq", "check"): cmd_ineq_check,
    ("identities", "run"): cmd_identities,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fg", description="flat weighted Minkowski space verification toolkit")
    sub = parser.add_subparsers(dest="group", required=True)
    for group, action in _COMMANDS:
        g = sub.add_parser(group)
        gsub = g.add_subparsers(dest="action", required=True)
        a = gsub.add_parser(action)
        a.add_argument("--config", required=True, help="experiment JSON")
        a.add_argument("--out", default=".", help="output directory")
        a.add_argument("--seed", type=int, default=None, help="bank seed override")
        a.add_argument("--override-k", type=float, default=None,
                       help="pin the curvature constant (falsification runs only)")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        handler = _COMMANDS[(args.group, args.action)]
        return handler(config, args.out, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    except Exception as exc:  # solver/runtime failures surface as exit 3
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
