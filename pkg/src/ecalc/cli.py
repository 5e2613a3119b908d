"""Command-line entry point ``ecalc``.

Subcommands::

    ecalc check MODEL.json FORMULA [--table]
    ecalc bisim MODEL1.json MODEL2.json
    ecalc step SCENARIO.yaml [--path 0,2] [--interactive] [--all-labels]
    ecalc explore SCENARIO.yaml [--out lts.json] [--format structured|dot-graph]
    ecalc scenario SCENARIO.yaml
    ecalc props [--seed N] [--count N] [--suite NAME ...]

Exit codes: 0 everything passed, 1 some assertion or property failed,
2 bad input, 3 no failure but the exploration was truncated.

Every flag with an environment counterpart (``ECALC_SEED``, ``ECALC_COUNT``,
``ECALC_MAX_DEPTH``, ``ECALC_MAX_NODES``, ``ECALC_MAX_KRIPKE``, ``ECALC_MODE``,
``ECALC_OUT``, ``ECALC_FORMAT``, ``ECALC_NO_QUOTIENT``) takes precedence
over it; the environment takes precedence over the scenario file.
"""
from __future__ import annotations

import argparse
import json
import os
import shlex
import sys
import time
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import props as P
from .epistemics import (
    Evaluator, PointedModel, bisimilar, canonical_form, extension, holds,
)
from .epistemics.logic import show_formula
from .frontend.export import FORMATS, STRUCTURED, export_lts
from .frontend.models import ModelFileError, action_loader, load_model, save_model
from .frontend.parser import ParseError, declarations_for, parse_formula
from .frontend.scenario import ScenarioError, ScenarioSpec, load_scenario
from .semantics import (
    MODES, AgentInFact, Bounds, Configuration, apply_effect, explore, raw_transitions,
    show_label, trace_check,
)
from .semantics.explore import _KEEP
from .terms import pretty

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_TRUNCATED = 0, 1, 2, 3
DEFAULT_CEX_DIR = "ecalc-counterexamples"


class UsageError(Exception):
    pass


@dataclass
class Outcome:
    name: str
    passed: bool
    detail: str = ""
    counterexample: Optional[dict] = None


@dataclass
class RunReport:
    command: str
    outcomes: list = field(default_factory=list)
    truncated: bool = False
    truncation_reasons: tuple = ()
    seconds: float = 0.0
    seed: Optional[int] = None
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(o.passed for o in self.outcomes)

    @property
    def exit_code(self) -> int:
        if not self.passed:
            return EXIT_FAIL
        return EXIT_TRUNCATED if self.truncated else EXIT_OK

    def add(self, name, passed, detail="", counterexample=None) -> Outcome:
        o = Outcome(name, bool(passed), detail, counterexample)
        self.outcomes.append(o)
        return o

    def render(self) -> str:
        lines = [f"$ {self.command}"]
        lines += self.notes
        for o in self.outcomes:
            lines.append(f"{'PASS' if o.passed else 'FAIL'}  {o.name}" + (f": {o.detail}" if o.detail else ""))
            if o.counterexample:
                for k, v in o.counterexample.items():
                    lines.append(f"      {k}: {v}")
        if self.truncated:
            lines.append(f"TRUNCATED ({', '.join(self.truncation_reasons)}); results are partial")
        if self.seed is not None:
            lines.append(f"seed: {self.seed}")
        lines.append(f"time: {self.seconds:.2f}s")
        return "\n".join(lines)


# -- option resolution ----------------------------------------------------------

def _env(name: str, kind=str):
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return None
    if kind is bool:
        return raw.lower() not in ("0", "false", "no", "off")
    try:
        return kind(raw)
    except ValueError:
        raise UsageError(f"{name}={raw!r} is not a valid {kind.__name__}") from None


def _pick(flag, env_name, kind=str, fallback=None):
    if flag is not None:
        return flag
    v = _env(env_name, kind)
    return fallback if v is None else v


def _bounds(args, base: Bounds) -> Bounds:
    try:
        return Bounds(
            max_depth=_pick(args.max_depth, "ECALC_MAX_DEPTH", int, base.max_depth),
            max_nodes=_pick(args.max_nodes, "ECALC_MAX_NODES", int, base.max_nodes),
            max_kripke_states=_pick(args.max_kripke, "ECALC_MAX_KRIPKE", int, base.max_kripke_states),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _mode(args, base: str) -> str:
    mode = _pick(args.mode, "ECALC_MODE", str, base)
    if mode not in MODES:
        raise UsageError(f"mode must be one of {MODES}, not {mode!r}")
    return mode


def _quotient(args) -> bool:
    if args.no_quotient:
        return False
    return not _pick(None, "ECALC_NO_QUOTIENT", bool, False)


# -- counterexample files ---------------------------------------------------------

def write_counterexample(directory, stem: str, note: str, models: dict, formula: Optional[str] = None,
                         extra: Optional[dict] = None) -> dict:
    """Save each model as a loadable JSON file plus a summary with replay commands."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    files = {}
    for label, obj in models.items():
        path = d / f"{stem}.{label}.json"
        save_model(obj, path, renumber=False)
        files[label] = str(path)
    replay = []
    # models are listed input first, so the last Kripke model is where the formula was checked
    kripke = [files[k] for k, v in models.items() if isinstance(v, PointedModel)]
    if formula is not None and kripke:
        replay.append(f"ecalc check {shlex.quote(kripke[-1])} {shlex.quote(formula)}")
    if len(kripke) >= 2 and formula is None:
        replay.append(f"ecalc bisim {shlex.quote(kripke[-2])} {shlex.quote(kripke[-1])}")
    summary = {"note": note, "formula": formula, "files": files, "replay": replay}
    if extra:
        summary.update(extra)
    (d / f"{stem}.summary.json").write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n")
    return summary


# -- check / bisim ------------------------------------------------------------------

def _load_kripke(path: str) -> PointedModel:
    try:
        obj = load_model(path)
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror or exc}") from None
    except ModelFileError as exc:
        raise UsageError(f"{path}: {exc}") from None
    if not isinstance(obj, PointedModel):
        raise UsageError(f"{path}: expected a Kripke model, found an action model")
    return obj


def cmd_check(model_path: str, formula_text: str, table: bool = False) -> RunReport:
    start = time.perf_counter()
    report = RunReport(f"ecalc check {model_path} {shlex.quote(formula_text)}")
    pm = _load_kripke(model_path)
    m = pm.model
    decl = declarations_for(atoms=m.atoms, agents=m.agents)
    loader = action_loader(Path(model_path).parent, m.agents, m.atoms)
    try:
        f = parse_formula(formula_text, decl, file="<formula>", load_action=loader)
    except ParseError as exc:
        raise UsageError(str(exc)) from None
    value = holds(pm, f)
    report.notes.append(str(value).lower())
    if table:
        ext = extension(m, f)
        for s in sorted(m.states, key=repr):
            mark = "*" if s == pm.point else " "
            report.notes.append(f"  {mark} {s!r}: {str(s in ext).lower()}")
    report.add(show_formula(f), value, f"at point {pm.point!r}")
    report.seconds = time.perf_counter() - start
    return report


def cmd_bisim(path1: str, path2: str) -> RunReport:
    start = time.perf_counter()
    report = RunReport(f"ecalc bisim {path1} {path2}")
    p1, p2 = _load_kripke(path1), _load_kripke(path2)
    if set(p1.model.agents) != set(p2.model.agents) or set(p1.model.atoms) != set(p2.model.atoms):
        raise UsageError("the two models are over different agents or atoms")
    res = bisimilar(p1, p2, witness=True)
    report.notes.append(str(res.bisimilar).lower())
    detail = ""
    if not res.bisimilar:
        b1, b2 = res.point_blocks
        detail = (f"point of model 1 is in block {sorted((s for _, s in b1), key=repr)!r} of model 1; "
                  f"point of model 2 is in block {sorted((s for _, s in b2), key=repr)!r} of model 2")
    else:
        detail = f"{len(res.relation)} related pairs"
    report.add("bisimilar", res.bisimilar, detail)
    report.seconds = time.perf_counter() - start
    return report


# -- scenarios ----------------------------------------------------------------------

def _shortest_paths(lts) -> dict:
    """Label path from the root to every node, along breadth-first tree edges."""
    prev = {lts.root: None}
    queue = deque([lts.root])
    while queue:
        i = queue.popleft()
        for label, d in lts.successors(i):
            if d not in prev:
                prev[d] = (i, label)
                queue.append(d)
    cache = {}

    def path(i):
        if i in cache:
            return cache[i]
        steps = []
        j = i
        while prev.get(j) is not None:
            j, label = prev[j]
            steps.append(show_label(label))
        cache[i] = steps[::-1]
        return cache[i]

    return path


def _check_assertions(spec: ScenarioSpec, lts, report: RunReport, cex_dir) -> None:
    report.truncated = lts.truncated
    report.truncation_reasons = tuple(sorted(lts.reasons))
    terminals = lts.terminals()
    report.notes.append(f"{spec.name}: {len(lts.nodes)} nodes, {len(lts.edges)} edges, "
                        f"{len(terminals)} terminal")
    path_of = _shortest_paths(lts)
    ev = Evaluator()
    for k, a in enumerate(spec.assertions):
        if a.check == "terminals-bisimilar":
            reps = {}
            for i in terminals:
                reps.setdefault(canonical_form(lts.nodes[i].config.state).key, i)
            idx = list(reps.values())
            bad = next((j for j in idx[1:] if not bisimilar(lts.nodes[idx[0]].config.state,
                                                              lts.nodes[j].config.state)), None)
            ok = bool(terminals) and bad is None
            cx = None
            if bad is not None:
                n0, n1 = lts.nodes[idx[0]], lts.nodes[bad]
                cx = write_counterexample(cex_dir, f"{spec.name}.assert{k}", a.describe(),
                                          {"terminal_a": n0.config.state, "terminal_b": n1.config.state},
                                          extra={"path_a": path_of(n0.index), "path_b": path_of(n1.index)})
            detail = f"{len(terminals)} terminal configurations, {len(reps)} distinct states"
            if not terminals:
                detail = "no terminal configurations"
            report.add(a.describe(), ok, detail, cx)
            continue
        if a.scope == "root":
            scope = [lts.root]
        elif a.scope == "all-terminal":
            scope = terminals
        else:
            scope = [n.index for n in lts.nodes]
        failing = next((i for i in scope if not holds(lts.nodes[i].config.state, a.formula, ev)), None)
        cx = None
        if failing is not None:
            node = lts.nodes[failing]
            cx = write_counterexample(cex_dir, f"{spec.name}.assert{k}", a.describe(),
                                      {"state": node.config.state}, show_formula(a.formula),
                                      extra={"node": failing, "path": path_of(failing),
                                             "system": pretty(node.config.system)})
        ok = failing is None and (a.scope != "all-terminal" or bool(terminals))
        report.add(a.describe(), ok, f"{len(scope)} configurations checked", cx)


def run_scenario(spec: ScenarioSpec, bounds: Optional[Bounds] = None, mode: Optional[str] = None,
                 quotient: bool = True, cex_dir=DEFAULT_CEX_DIR, traces: bool = True,
                 command: Optional[str] = None):
    """Explore a scenario and evaluate its assertions; returns ``(report, lts)``."""
    start = time.perf_counter()
    bounds = bounds or spec.bounds
    mode = mode or spec.mode
    report = RunReport(command or f"ecalc scenario {spec.path or spec.name}")
    u = spec.universe
    c0 = Configuration(spec.model, spec.system)
    lts = None
    if spec.explore:
        lts = explore(c0, u, bounds, mode=mode, feed=spec.feeds, quotient=quotient)
        _check_assertions(spec, lts, report, cex_dir)
    else:
        report.notes.append(f"{spec.name}: exploration disabled by the scenario")
    if traces:
        results = {}
        for t in spec.traces:
            found = trace_check(c0, u, t.patterns, max_configs=bounds.max_nodes)
            results[t.name] = found
            if t.expect == "nonempty":
                ok = bool(found)
            elif t.expect == "empty":
                ok = not found
            else:
                ok = len(found) == t.expect
            cx = None
            if not ok:
                cx = {"patterns": [str(p) for p in t.patterns], "reached": len(found)}
            report.add(f"trace {t.name}", ok, f"{len(found)} configurations reached, expected {t.expect}", cx)
        for r in spec.trace_relations:
            states = [c.state for c in results[r.left] + results[r.right]]
            if not results[r.left] or not results[r.right]:
                report.add(f"{r.left} {r.relation} {r.right}", False, "a trace reached nothing")
                continue
            bad = next((s for s in states[1:] if not bisimilar(states[0], s)), None)
            cx = None
            if bad is not None:
                cx = write_counterexample(cex_dir, f"{spec.name}.{r.left}-{r.right}",
                                          f"{r.left} vs {r.right}", {"left": states[0], "right": bad})
            report.add(f"{r.left} {r.relation} {r.right}", bad is None,
                       f"{len(states)} end states compared", cx)
    report.seconds = time.perf_counter() - start
    return report, lts


def _load_spec(path: str) -> ScenarioSpec:
    try:
        return load_scenario(path)
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror or exc}") from None
    except ScenarioError as exc:
        raise UsageError(str(exc)) from None


def cmd_explore(args, with_traces: bool) -> RunReport:
    spec = _load_spec(args.scenario)
    bounds = _bounds(args, spec.bounds)
    mode = _mode(args, spec.mode)
    out = _pick(args.out, "ECALC_OUT")
    fmt = _pick(args.format, "ECALC_FORMAT", str, STRUCTURED)
    if fmt not in FORMATS:
        raise UsageError(f"format must be one of {FORMATS}")
    name = "scenario" if with_traces else "explore"
    report, lts = run_scenario(spec, bounds, mode, _quotient(args), args.cex_dir,
                               traces=with_traces, command=f"ecalc {name} {args.scenario}")
    if out and lts is not None:
        Path(out).write_bytes(export_lts(lts, fmt))
        report.notes.append(f"wrote {fmt} export to {out}")
    return report


# -- step -----------------------------------------------------------------------------

class Stepper:
    """Current configuration of a scenario plus the feed position."""

    def __init__(self, spec: ScenarioSpec, mode: str, all_labels: bool = False):
        self.spec = spec
        self.u = spec.universe
        self.mode = mode
        self.keep = None if all_labels else _KEEP[mode]
        self.config = Configuration(spec.model, spec.system)
        self.cursor = {ch: 0 for ch in spec.feeds}
        self.history: list = []

    def _fact_inputs(self, ch):
        if ch in self.cursor:
            script = self.spec.feeds[ch]
            pos = self.cursor[ch]
            return [script[pos]] if pos < len(script) else []
        return sorted(self.u.atoms)

    def options(self) -> list:
        ts = raw_transitions(self.config, self.u, keep=self.keep, fact_inputs=self._fact_inputs)
        seen, out = set(), []
        for t in ts:
            key = (t.label, t.system)
            if key not in seen:
                seen.add(key)
                out.append(t)
        return sorted(out, key=lambda t: (show_label(t.label), pretty(t.system)))

    def apply(self, t) -> None:
        self.config = Configuration(apply_effect(self.config.state, t.effect), t.system)
        if isinstance(t.label, AgentInFact) and t.label.a in self.cursor:
            self.cursor[t.label.a] += 1
        self.history.append(show_label(t.label))

    def describe(self) -> list:
        lines = [f"system: {pretty(self.config.system)}",
                 f"state: {self.config.state.model.size()} Kripke states"]
        opts = self.options()
        if not opts:
            lines.append("no transitions")
        for i, t in enumerate(opts):
            size = apply_effect(self.config.state, t.effect).model.size() if t.effect else self.config.state.model.size()
            lines.append(f"  [{i}] {show_label(t.label)}  ->  {pretty(t.system)}  ({size} Kripke states)")
        return lines


def cmd_step(args, stdin=None, stdout=None) -> RunReport:
    start = time.perf_counter()
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    spec = _load_spec(args.scenario)
    mode = _mode(args, spec.mode)
    report = RunReport(f"ecalc step {args.scenario}")
    st = Stepper(spec, mode, args.all_labels)
    choices = []
    if args.path:
        try:
            choices = [int(x) for x in args.path.split(",") if x.strip()]
        except ValueError:
            raise UsageError("--path takes comma-separated transition indices") from None
    for c in choices:
        opts = st.options()
        if not 0 <= c < len(opts):
            raise UsageError(f"--path index {c} out of range (0..{len(opts) - 1})")
        st.apply(opts[c])
    if not args.interactive:
        report.notes += st.describe()
        report.seconds = time.perf_counter() - start
        return report
    while True:
        for line in st.describe():
            print(line, file=stdout)
        opts = st.options()
        if not opts:
            break
        print("choose an index (q to quit): ", end="", file=stdout, flush=True)
        raw = stdin.readline()
        if not raw or raw.strip().lower() in ("q", "quit"):
            break
        try:
            k = int(raw.strip())
        except ValueError:
            print(f"not an index: {raw.strip()!r}", file=stdout)
            continue
        if not 0 <= k < len(opts):
            print(f"index {k} out of range (0..{len(opts) - 1})", file=stdout)
            continue
        st.apply(opts[k])
    report.notes.append("path: " + (" . ".join(st.history) or "(empty)"))
    report.seconds = time.perf_counter() - start
    return report


# -- props ------------------------------------------------------------------------------

def cmd_props(args, update=None) -> RunReport:
    start = time.perf_counter()
    seed = _pick(args.seed, "ECALC_SEED", int, 0)
    count = _pick(args.count, "ECALC_COUNT", int, 500)
    if count < 1:
        raise UsageError("--count must be at least 1")
    try:
        caps = P.SizeCaps(args.max_states, args.max_agents, args.max_atoms)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    names = args.suite or list(P.SUITES)
    unknown = [n for n in names if n not in P.SUITES]
    if unknown:
        raise UsageError(f"unknown suite {unknown[0]!r}; known: {', '.join(P.SUITES)}")
    report = RunReport(f"ecalc props --seed {seed} --count {count}", seed=seed)
    kwargs = {} if update is None else {"update": update}
    for res in P.run_all(seed, count, caps, only=names, **kwargs):
        detail = f"{res.checked} checked, {res.vacuous} vacuous, {res.seconds:.2f}s"
        cx = None
        if not res.passed:
            c = res.counterexample
            detail += f", failing seeds {res.failures[:10]}"
            cx = write_counterexample(args.cex_dir, f"{res.name}.seed{c.seed}", c.note, c.models,
                                      c.formula, extra={"seed": c.seed, "suite": res.name})
        report.add(res.name, res.passed, detail, cx)
    report.seconds = time.perf_counter() - start
    return report


# -- argument parsing --------------------------------------------------------------------

def _add_explore_flags(p):
    p.add_argument("--max-depth", type=int)
    p.add_argument("--max-nodes", type=int)
    p.add_argument("--max-kripke", type=int, help="largest epistemic state (Kripke states) to keep")
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--no-quotient", action="store_true",
                   help="keep epistemic states as computed instead of bisimulation-minimal")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ecalc", description="e-calculus interpreter and model checker")
    ap.add_argument("--cex-dir", default=DEFAULT_CEX_DIR,
                    help="directory for counterexample files (default: %(default)s)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="evaluate a formula at the point of a Kripke model")
    p.add_argument("model")
    p.add_argument("formula")
    p.add_argument("--table", action="store_true", help="print the value at every state")

    p = sub.add_parser("bisim", help="decide bisimilarity of two pointed models")
    p.add_argument("model1")
    p.add_argument("model2")

    p = sub.add_parser("step", help="list or interactively take transitions of a scenario")
    p.add_argument("scenario")
    p.add_argument("--interactive", "-i", action="store_true")
    p.add_argument("--path", help="comma-separated transition indices to take first")
    p.add_argument("--all-labels", action="store_true",
                   help="list every label, not just those kept by the mode")
    p.add_argument("--mode", choices=MODES)

    for name, text in (("explore", "explore a scenario and check its assertions"),
                       ("scenario", "explore a scenario, check assertions and traces")):
        p = sub.add_parser(name, help=text)
        p.add_argument("scenario")
        p.add_argument("--out", help="write the LTS export here")
        p.add_argument("--format", choices=FORMATS)
        _add_explore_flags(p)

    p = sub.add_parser("props", help="run the seeded update property suites")
    p.add_argument("--seed", type=int)
    p.add_argument("--count", type=int)
    p.add_argument("--max-states", type=int, default=5)
    p.add_argument("--max-agents", type=int, default=3)
    p.add_argument("--max-atoms", type=int, default=3)
    p.add_argument("--suite", action="append", help=f"one of {', '.join(P.SUITES)}; repeatable")
    return ap


def run(argv=None, stdin=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        if args.command == "check":
            report = cmd_check(args.model, args.formula, args.table)
        elif args.command == "bisim":
            report = cmd_bisim(args.model1, args.model2)
        elif args.command == "step":
            report = cmd_step(args, stdin, stdout)
        elif args.command in ("explore", "scenario"):
            report = cmd_explore(args, with_traces=args.command == "scenario")
        else:
            report = cmd_props(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(report.render(), file=stdout)
    return report.exit_code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
