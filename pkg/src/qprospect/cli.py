"""Command-line front end.

Commands: ``predict``, ``eval-quantum``, ``pipeline``, ``logic-demo`` and
``verify``.  Exit codes: 0 success, 2 validation failure, 3 numerical
invariant failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import channels as ch
from . import eventlogic as ev
from . import qdt
from .errors import NumericalInvariantError, ValidationError
from .numkernel import DEFAULT_TOL, Tolerance
from .probability import clamp_probability
from .qstate import random_unitary
from .report import ReportDocument
from .scenario import BUILTIN_SCENARIOS, ScenarioFile, builtin_text, parse_scenario
from .verify import run_verify, spin_half_logic

EXIT_OK, EXIT_VALIDATION, EXIT_INVARIANT = 0, 2, 3

COMMAND_KINDS = {
    "predict": "prediction",
    "eval-quantum": "quantum",
    "pipeline": "pipeline",
    "logic-demo": "logic_demo",
}

# audit thresholds for the numerical commands
TRACE_TOL = 1e-12
CUT_TOL = 1e-10
CHOI_TOL = 1e-10
LOGIC_TOL = 1e-12


@dataclass
class Options:
    seed: int = 0
    mu: float | None = None
    mu_c: float | None = None
    tol: Tolerance = DEFAULT_TOL


@dataclass
class CommandResult:
    document: ReportDocument
    exit_code: int


def _header(doc: ReportDocument, command: str, scenario: ScenarioFile | None, opts: Options) -> None:
    doc.add("command", command)
    if scenario is not None:
        doc.add("scenario", scenario.name or "(file)")
        doc.add("kind", scenario.kind)
    doc.add("seed", opts.seed)


def _predict(scenario: ScenarioFile, opts: Options) -> CommandResult:
    sec = scenario.prediction
    a = sec.attraction
    mu = opts.mu if opts.mu is not None else a.mu
    mu_c = opts.mu_c if opts.mu_c is not None else a.mu_c
    spec = qdt.AttractionSpec(a.mode, a.signs, a.magnitudes, mu, mu_c)
    rep = qdt.predict(sec.lattice, sec.utility, spec, empirical=sec.empirical, tol=opts.tol)

    doc = ReportDocument()
    _header(doc, "predict", scenario, opts)
    doc.add("mu", float(mu))
    doc.add("mu_c", float(mu_c))
    doc.add("n_prospects", len(rep.rows))
    for i, r in enumerate(rep.rows, start=1):
        doc.add(f"prospect.{i}.label", r.label)
        doc.add(f"prospect.{i}.f", r.f)
        doc.add(f"prospect.{i}.q", r.q)
        doc.add(f"prospect.{i}.p", r.p)
        doc.add(f"prospect.{i}.rank_useful", r.rank_f)
        doc.add(f"prospect.{i}.rank_attractive", r.rank_q)
        doc.add(f"prospect.{i}.rank_preferable", r.rank_p)
        if rep.empirical is not None:
            doc.add(f"prospect.{i}.empirical", rep.empirical[i - 1])
    if rep.empirical is not None:
        doc.add("max_empirical_deviation", rep.max_empirical_deviation)
    doc.add("ordering.useful", " > ".join(rep.ordering("f")))
    doc.add("ordering.attractive", " > ".join(rep.ordering("q")))
    doc.add("ordering.preferable", " > ".join(rep.ordering("p")))
    doc.extend("diagnostics.", rep.diagnostics)
    if len(rep.rows) == 2:
        base = qdt.predict(sec.lattice, sec.utility, qdt.AttractionSpec(a.mode, a.signs, a.magnitudes, 0.0, mu_c),
                           tol=opts.tol)
        if base.q[0] != base.q[1]:
            doc.add("preference_reversal_mu", qdt.preference_reversal_threshold(base.f, base.q, mu_c))

    headers = ["prospect", "f", "q", "p"] + (["empirical"] if rep.empirical is not None else [])
    rows = [[r.label, r.f, r.q, r.p] + ([rep.empirical[i]] if rep.empirical is not None else [])
            for i, r in enumerate(rep.rows)]
    doc.table(headers, rows, title=f"Prediction ({scenario.name or 'scenario'}, mu={mu:g}, mu_c={mu_c:g})")
    doc.text(f"more useful:     {' > '.join(rep.ordering('f'))}")
    doc.text(f"more attractive: {' > '.join(rep.ordering('q'))}")
    doc.text(f"preferable:      {' > '.join(rep.ordering('p'))}")
    if rep.empirical is not None:
        doc.text(f"max |p - empirical| = {rep.max_empirical_deviation:.6f}")

    ok = rep.diagnostics["normalization_defect"] <= 1e-12 and rep.diagnostics["alternation_defect"] <= 1e-12
    return CommandResult(doc, EXIT_OK if ok else EXIT_INVARIANT)


def _eval_quantum(scenario: ScenarioFile, opts: Options) -> CommandResult:
    sec = scenario.quantum
    rho = sec.rho
    lattice = sec.lattice
    sa = qdt.attraction_from_state(rho, lattice, opts.tol)
    d_a, d_b = sec.dims
    state_sep = ev.is_separable(rho.matrix, [d_a, d_b], opts.tol)

    doc = ReportDocument()
    _header(doc, "eval-quantum", scenario, opts)
    doc.add("dims", f"{d_a}x{d_b}")
    doc.add("state_diagonal_in_product_basis", state_sep.separable)
    failures = []
    rows = []
    for i, (pi, raw) in enumerate(zip(lattice.prospects, sa.raw), start=1):
        sep = ev.is_separable(ev.prospect_operator(pi, tol=opts.tol), [d_a, d_b], opts.tol)
        doc.add(f"prospect.{i}.label", pi.label)
        doc.add(f"prospect.{i}.operator", sep.label)
        raw_p, raw_diag = clamp_probability(raw.total)
        p, p_diag = clamp_probability(sa.p[i - 1])
        doc.add(f"prospect.{i}.raw_p", raw_p)
        doc.add(f"prospect.{i}.raw_f", raw.utility_factor)
        doc.add(f"prospect.{i}.raw_q", raw.attraction_factor)
        doc.add(f"prospect.{i}.p", p)
        doc.add(f"prospect.{i}.f", sa.f[i - 1])
        doc.add(f"prospect.{i}.q", sa.q[i - 1])
        # unclamped values only when clamping moved them noticeably
        doc.extend(f"prospect.{i}.raw_p.", raw_diag)
        doc.extend(f"prospect.{i}.p.", p_diag)
        rows.append([pi.label, sep.label, raw_p, raw.utility_factor, raw.attraction_factor,
                     p, sa.f[i - 1], sa.q[i - 1]])
        if abs(raw.total - (raw.utility_factor + raw.attraction_factor)) > 1e-14 * max(1.0, abs(raw.total)):
            failures.append(f"decomposition {i}")
        if not -1.0 <= sa.q[i - 1] <= 1.0:
            failures.append(f"range {i}")
        if (state_sep.separable or sep.separable) and abs(raw.attraction_factor) > 1e-12:
            failures.append(f"theorem {i}")
    doc.add("raw_probability_sum", sa.raw_total)
    doc.add("raw_alternation_defect", sa.raw_alternation_defect)
    doc.add("alternation_defect", sa.alternation_defect)
    doc.add("unity_defect", sa.unity_defect)
    if abs(sa.alternation_defect) > 1e-12:
        failures.append("alternation")
    doc.add("status", "fail" if failures else "pass")
    if failures:
        doc.add("failures", ", ".join(failures))

    doc.table(["prospect", "operator", "raw p", "raw f", "raw q", "p", "f", "q"], rows,
              title=f"Quantum prospect evaluation ({d_a}x{d_b})")
    doc.text(f"sum of raw probabilities = {sa.raw_total:.12g} (prospect operators miss the identity by "
             f"{sa.unity_defect:.6g} in Frobenius norm)")
    doc.text(f"alternation defect after renormalization = {sa.alternation_defect:.3e}")
    return CommandResult(doc, EXIT_INVARIANT if failures else EXIT_OK)


def _pipeline_from_section(scenario: ScenarioFile) -> tuple[ch.MeasurementPipeline, list]:
    sec = scenario.pipeline
    rng = np.random.default_rng(scenario.seed)
    total = int(np.prod(sec.dims))
    us = {}
    for key in ("preparation", "evolution_2", "evolution_4"):
        us[key] = sec.unitaries[key] if key in sec.unitaries else random_unitary(total, rng).matrix
    p = ch.build_pipeline(sec.dims, us["preparation"], us["evolution_2"], us["evolution_4"], sec.timestamps)
    return p, list(sec.initial)


def _pipeline(scenario: ScenarioFile, opts: Options) -> CommandResult:
    p, initial = _pipeline_from_section(scenario)
    traj = ch.run_pipeline(p, initial)
    doc = ReportDocument()
    _header(doc, "pipeline", scenario, opts)
    doc.add("dims", "x".join(str(d) for d in p.dims))
    failures = []
    rows = []
    for k, (step, audit, t) in enumerate(zip(p.steps, traj.audits, p.timestamps), start=1):
        choi_min = float(np.linalg.eigvalsh(ch.choi_state(step, p.dims).matrix)[0])
        doc.add(f"step.{k}.label", step.label)
        doc.add(f"step.{k}.time", t)
        doc.add(f"step.{k}.trace_defect", audit.trace_defect)
        if audit.cut_defect is not None:
            doc.add(f"step.{k}.product_cut_defect", audit.cut_defect)
        doc.add(f"step.{k}.dual_state_min_eigenvalue", choi_min)
        doc.add(f"step.{k}.purity", traj.states[k - 1].purity())
        rows.append([step.label, t, audit.trace_defect,
                     "-" if audit.cut_defect is None else f"{audit.cut_defect:.3e}", choi_min])
        if audit.trace_defect > TRACE_TOL:
            failures.append(f"trace {k}")
        if audit.cut_defect is not None and audit.cut_defect > CUT_TOL:
            failures.append(f"cut {k}")
        if choi_min < -CHOI_TOL:
            failures.append(f"dual state {k}")
    cmp = ch.compare_with_luders(traj, 0, 0)
    doc.add("comparison.pipeline_p_A0", cmp.pipeline_probability)
    doc.add("comparison.luders_p_A0_given_B0", cmp.luders_probability)
    doc.add("comparison.difference", cmp.difference)
    doc.add("status", "fail" if failures else "pass")
    if failures:
        doc.add("failures", ", ".join(failures))

    doc.table(["step", "time", "trace defect", "cut defect", "dual min eig"], rows,
              title=f"Measurement pipeline ({doc.get('dims')})")
    doc.text(f"pipeline p(A0) = {cmp.pipeline_probability:.6f}; "
             f"Lüders p(A0|B0) = {cmp.luders_probability:.6f}")
    return CommandResult(doc, EXIT_INVARIANT if failures else EXIT_OK)


def _logic_demo(scenario: ScenarioFile | None, opts: Options) -> CommandResult:
    r = spin_half_logic()
    doc = ReportDocument()
    _header(doc, "logic-demo", scenario, opts)
    doc.add("A", "|x+><x+|")
    doc.add("B1", "|z+><z+|")
    doc.add("B2", "|z-><z-|")
    for key, value in r.items():
        doc.add(key, value)
    lhs_is_a = r["lhs_minus_a"] <= LOGIC_TOL
    rhs_zero = r["rhs_norm"] <= LOGIC_TOL
    doc.add("meet(A,join(B1,B2)) == A", lhs_is_a)
    doc.add("join(meet(A,B1),meet(A,B2)) == 0", rhs_zero)
    doc.add("distributive", not (lhs_is_a and rhs_zero))
    doc.table(["expression", "result", "Frobenius defect"], [
        ["join(B1, B2)", "1", f"{r['join_b1_b2_minus_identity']:.3e}"],
        ["meet(A, B1)", "0", f"{r['meet_a_b1_norm']:.3e}"],
        ["meet(A, B2)", "0", f"{r['meet_a_b2_norm']:.3e}"],
        ["meet(A, join(B1, B2))", "A", f"{r['lhs_minus_a']:.3e}"],
        ["join(meet(A, B1), meet(A, B2))", "0", f"{r['rhs_norm']:.3e}"],
    ], title="Spin-1/2 non-distributivity")
    doc.text("meet does not distribute over join: A != 0.")
    ok = lhs_is_a and rhs_zero and all(r[k] <= LOGIC_TOL for k in
                                       ("join_b1_b2_minus_identity", "meet_a_b1_norm", "meet_a_b2_norm"))
    return CommandResult(doc, EXIT_OK if ok else EXIT_INVARIANT)


def _verify(opts: Options, workers: int = 1) -> CommandResult:
    results = run_verify(seed=opts.seed, workers=workers)
    doc = ReportDocument()
    _header(doc, "verify", None, opts)
    rows = []
    for k, r in enumerate(results, start=1):
        doc.add(f"check.{k}.module", r.module)
        doc.add(f"check.{k}.name", r.name)
        doc.add(f"check.{k}.passed", r.passed)
        doc.add(f"check.{k}.worst", r.worst if math.isfinite(r.worst) else "inf")
        doc.add(f"check.{k}.tolerance", r.tolerance)
        doc.add(f"check.{k}.samples", r.samples)
        rows.append([r.module, r.name, "PASS" if r.passed else "FAIL",
                     f"{r.worst:.3e}", f"{r.tolerance:.0e}", r.samples])
    n_fail = sum(not r.passed for r in results)
    doc.add("checks", len(results))
    doc.add("failed", n_fail)
    doc.table(["module", "invariant", "status", "worst", "tolerance", "samples"], rows, title="Invariant suite")
    doc.text(f"{len(results) - n_fail}/{len(results)} checks passed")
    return CommandResult(doc, EXIT_INVARIANT if n_fail else EXIT_OK)


def run_command(command: str, scenario: ScenarioFile | None, opts: Options | None = None,
                workers: int = 1) -> CommandResult:
    """Dispatch a parsed scenario to a command; never raises for bad input."""
    opts = opts or Options()
    try:
        if command == "verify":
            return _verify(opts, workers)
        if command == "logic-demo" and scenario is None:
            return _logic_demo(None, opts)
        if command not in COMMAND_KINDS:
            raise ValidationError(f"unknown command {command!r}")
        if scenario is None:
            raise ValidationError(f"{command} needs --scenario or --builtin")
        if scenario.kind != COMMAND_KINDS[command]:
            raise ValidationError(f"{command} expects a '{COMMAND_KINDS[command]}' scenario, got '{scenario.kind}'")
        handler = {"predict": _predict, "eval-quantum": _eval_quantum,
                   "pipeline": _pipeline, "logic-demo": _logic_demo}[command]
        return handler(scenario, opts)
    except NumericalInvariantError as exc:
        return _error_document(command, "numerical", str(exc), EXIT_INVARIANT)
    except ValidationError as exc:
        return _error_document(command, "validation", str(exc), EXIT_VALIDATION)


def _error_document(command: str, category: str, message: str, code: int) -> CommandResult:
    doc = ReportDocument()
    doc.add("command", command)
    doc.add("status", "error")
    doc.add("error.category", category)
    doc.add("error.message", message.replace("\t", " ").replace("\n", " "))
    doc.text(f"error ({category}): {message}")
    return CommandResult(doc, code)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qprospect", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--scenario", type=Path, help="path to a JSON scenario file")
    src.add_argument("--builtin", choices=sorted(BUILTIN_SCENARIOS), help="use a builtin scenario")
    common.add_argument("--seed", type=int, default=None, help="random seed (default: scenario seed or 0)")
    common.add_argument("--mu", type=float, default=None, help="information amount (default 0)")
    common.add_argument("--mu-c", type=float, default=None, dest="mu_c", help="critical information (default 1)")
    common.add_argument("--format", choices=["machine", "human", "both"], default="both")
    common.add_argument("--tolerance", type=float, default=None, help="override the equality tolerance")
    common.add_argument("--workers", type=int, default=1, help="parallel workers for verify")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("predict", "eval-quantum", "pipeline", "logic-demo", "verify"):
        sub.add_parser(name, parents=[common])
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    scenario = None
    try:
        tol = DEFAULT_TOL if args.tolerance is None else DEFAULT_TOL.with_equality(args.tolerance)
        if args.builtin:
            scenario = parse_scenario(builtin_text(args.builtin), name=args.builtin)
        elif args.scenario:
            try:
                text = args.scenario.read_bytes()
            except OSError as exc:
                raise ValidationError(f"cannot read scenario: {exc}") from exc
            scenario = parse_scenario(text, name=args.scenario.stem)
    except ValidationError as exc:
        result = _error_document(args.command, "validation", str(exc), EXIT_VALIDATION)
        sys.stdout.write(result.document.render(args.format))
        return result.exit_code
    seed = args.seed if args.seed is not None else (scenario.seed if scenario else 0)
    if scenario is not None and seed != scenario.seed:
        scenario = ScenarioFile(scenario.schema_version, scenario.kind, scenario.prediction, scenario.quantum,
                                scenario.pipeline, scenario.logic_demo, seed, scenario.name)
    opts = Options(seed=seed, mu=args.mu, mu_c=args.mu_c, tol=tol)
    result = run_command(args.command, scenario, opts, workers=args.workers)
    sys.stdout.write(result.document.render(args.format))
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
