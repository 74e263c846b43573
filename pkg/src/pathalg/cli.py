"""Command-line front end: parse problem files, dispatch, report.

A problem file is line-oriented::

    vertex <id> ...
    arrow <name> : <src> -> <tgt>
    order <name> < <name> < ...
    rule <path> -> <element>
    deform <path> -> <element>
    param <symbol> ...
    unknown <symbol> ...
    set trunc <N>
    set budget <M>

Paths are ``*``-joined arrow names or ``e<vertex>``; elements are
``+``/``-``-separated terms, each a ``*``-product of an optional rational,
declared symbols (with optional ``^k``) and arrow names.  ``#`` starts a
comment; the Unicode symbols λ, μ, ν and ħ are read as ``lam``, ``mu``,
``nu`` and ``hbar``.

Every run prints a plain-text report followed by one JSON document on the
last line.  Exit codes: 0 verdict-pass, 1 verdict-fail, 2 usage/parse error,
3 budget exhausted or inconclusive.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from .cohomology import hh2
from .quantization import (
    HBAR,
    PoissonBivector,
    enumerate_graphs,
    graphical_star,
    monomial,
    quantize_check,
    schouten_jacobi_check,
)
from .quiver_core import (
    AdmissibleOrder,
    Element,
    Path,
    PolyScalar,
    Quiver,
    UsageError,
)
from .reduction_engine import (
    DEFAULT_BUDGET,
    BudgetExceeded,
    CompletionError,
    ReductionSystem,
    Rule,
    ambiguities_n,
    check_diamond,
    complete,
    irreducible_paths,
    overlaps,
    reduce_full,
)
from .star_product import (
    DeformationCochain,
    GaugeOnArrows,
    gauge_check,
    mc_check,
    star,
)
from .variety import STRICT, mc_equations, order_condition

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3

_UNICODE_ALIASES = {"λ": "lam", "μ": "mu", "ν": "nu", "ħ": "hbar"}

_RATIONAL = re.compile(r"^-?\d+(/\d+)?$")
_SYMBOL = re.compile(r"^([A-Za-z_][A-Za-z_0-9]*)(\^(\d+))?$")


class ParseError(Exception):
    """A problem-file or element syntax error, with a line reference."""

    def __init__(self, message: str, line: int | None = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)


@dataclass
class ProblemFile:
    """A parsed problem file: quiver, rules, optional deformation and order."""

    quiver: Quiver
    system: ReductionSystem
    order: AdmissibleOrder | None
    params: list[str]
    unknowns: list[str]
    trunc: int
    budget: int
    deform_values: dict[Path, Element] = field(default_factory=dict)

    def cochain(self) -> DeformationCochain:
        if not self.deform_values:
            raise UsageError("this command needs a deform block")
        formal = all(c.min_param_degree() >= 1
                     for v in self.deform_values.values()
                     for c in v.terms.values())
        return DeformationCochain(self.system, self.deform_values,
                                  trunc=self.trunc if formal else None,
                                  formal=formal)


def _ascii(text: str) -> str:
    for sym, alias in _UNICODE_ALIASES.items():
        text = text.replace(sym, alias)
    return text


def _logical_lines(text: str):
    for i, raw in enumerate(_ascii(text).splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield i, line


class ElementParser:
    """Parses paths and elements against a quiver and declared symbols."""

    def __init__(self, quiver: Quiver, params: list[str], unknowns: list[str],
                 trunc: int | None):
        self.quiver = quiver
        self.params = set(params)
        self.unknowns = set(unknowns)
        self.trunc = trunc

    def parse_path(self, text: str, line: int | None = None) -> Path:
        text = _ascii(text).strip()
        if text.startswith("e") and text[1:] in self.quiver._vertex_index:
            return Path(self.quiver, vertex=text[1:])
        arrows = tuple(a.strip() for a in text.split("*"))
        for a in arrows:
            if a not in self.quiver._src:
                raise ParseError(f"unknown arrow {a!r} in path {text!r}", line)
        try:
            return Path(self.quiver, arrows=arrows)
        except UsageError as exc:
            raise ParseError(str(exc), line) from exc

    def _scalar_one(self) -> PolyScalar:
        return PolyScalar.rational(1, trunc=self.trunc,
                                   params=frozenset(self.params))

    def _symbol(self, name: str, power: int) -> PolyScalar:
        out = self._scalar_one()
        v = PolyScalar.var(name, is_param=name in self.params, trunc=self.trunc)
        for _ in range(power):
            out = out * v
        return out

    def parse_element(self, text: str, line: int | None = None) -> Element:
        text = _ascii(text).strip()
        if text in ("0", ""):
            return Element.zero(self.quiver)
        chunks = re.findall(r"[+-]?[^+-]+", text.replace(" ", ""))
        if "".join(chunks) != text.replace(" ", ""):
            raise ParseError(f"cannot tokenize element {text!r}", line)
        out = Element.zero(self.quiver)
        for chunk in chunks:
            out = out + self._parse_term(chunk, line)
        return out

    def _parse_term(self, chunk: str, line: int | None) -> Element:
        sign = Fraction(1)
        while chunk and chunk[0] in "+-":
            if chunk[0] == "-":
                sign = -sign
            chunk = chunk[1:]
        if not chunk:
            raise ParseError("empty term", line)
        coeff = self._scalar_one().scale(sign)
        arrows: list[str] = []
        vertex: str | None = None
        for factor in chunk.split("*"):
            if not factor:
                raise ParseError(f"empty factor in term {chunk!r}", line)
            if _RATIONAL.match(factor):
                coeff = coeff.scale(Fraction(factor))
                continue
            m = _SYMBOL.match(factor)
            if not m:
                raise ParseError(f"bad factor {factor!r}", line)
            name, power = m.group(1), int(m.group(3) or 1)
            if name in self.quiver._src:
                arrows.extend([name] * power)
            elif name in self.params or name in self.unknowns:
                coeff = coeff * self._symbol(name, power)
            elif name.startswith("e") and name[1:] in self.quiver._vertex_index:
                vertex = name[1:]
            else:
                raise ParseError(f"undeclared symbol {name!r}", line)
        if arrows and vertex is not None:
            raise ParseError(f"term {chunk!r} mixes a vertex and arrows", line)
        if arrows:
            path = self.parse_path("*".join(arrows), line)
        elif vertex is not None:
            path = Path(self.quiver, vertex=vertex)
        else:
            raise ParseError(f"term {chunk!r} has no path part "
                             "(use e<vertex> for scalars)", line)
        return Element.from_path(path, coeff)


def _split_rule(line_no: int, rest: str) -> tuple[str, str]:
    if "->" not in rest:
        raise ParseError("expected '<path> -> <element>'", line_no)
    lhs, rhs = rest.split("->", 1)
    return lhs.strip(), rhs.strip()


def parse_problem(text: str) -> ProblemFile:
    """Parse a problem file into a ProblemFile, raising ParseError on errors."""
    vertices: list[str] = []
    arrow_decls: list[tuple[str, str, str]] = []
    order_names: list[str] | None = None
    params: list[str] = []
    unknowns: list[str] = []
    trunc = 4
    budget = DEFAULT_BUDGET
    rule_lines: list[tuple[int, str, str]] = []
    deform_lines: list[tuple[int, str, str]] = []

    for line_no, line in _logical_lines(text):
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        if head == "vertex":
            vertices.extend(rest.split())
        elif head == "arrow":
            m = re.match(r"^(\S+)\s*:\s*(\S+)\s*->\s*(\S+)$", rest)
            if not m:
                raise ParseError("expected 'arrow <name> : <src> -> <tgt>'",
                                 line_no)
            arrow_decls.append((m.group(1), m.group(2), m.group(3)))
        elif head == "order":
            order_names = [n.strip() for n in rest.split("<")]
            if any(not n for n in order_names):
                raise ParseError("expected 'order a < b < ...'", line_no)
        elif head == "rule":
            rule_lines.append((line_no, *_split_rule(line_no, rest)))
        elif head == "deform":
            deform_lines.append((line_no, *_split_rule(line_no, rest)))
        elif head == "param":
            params.extend(rest.split())
        elif head == "unknown":
            unknowns.extend(rest.split())
        elif head == "set":
            key, _, value = rest.partition(" ")
            if key == "trunc":
                trunc = int(value)
            elif key == "budget":
                budget = int(value)
            else:
                raise ParseError(f"unknown setting {key!r}", line_no)
        else:
            raise ParseError(f"unknown directive {head!r}", line_no)

    if not vertices:
        raise ParseError("no vertices declared")
    try:
        quiver = Quiver(vertices, arrow_decls)
        order = AdmissibleOrder(quiver, order_names) if order_names else None
    except UsageError as exc:
        raise ParseError(str(exc)) from exc

    plain = ElementParser(quiver, params, unknowns, trunc=None)
    rules = []
    for line_no, lhs, rhs in rule_lines:
        rules.append(Rule(plain.parse_path(lhs, line_no),
                          plain.parse_element(rhs, line_no)))
    try:
        system = ReductionSystem(quiver, rules)
    except UsageError as exc:
        raise ParseError(str(exc)) from exc

    deformed = ElementParser(quiver, params, unknowns, trunc=trunc)
    deform_values: dict[Path, Element] = {}
    for line_no, lhs, rhs in deform_lines:
        deform_values[deformed.parse_path(lhs, line_no)] = \
            deformed.parse_element(rhs, line_no)

    return ProblemFile(quiver=quiver, system=system, order=order,
                       params=params, unknowns=unknowns, trunc=trunc,
                       budget=budget, deform_values=deform_values)


# ---------------------------------------------------------------------------
# Command implementations
# ---------------------------------------------------------------------------

class Report:
    """Accumulates plain-text lines and the machine-readable document."""

    def __init__(self, command: str):
        self.lines: list[str] = []
        self.doc: dict = {"command": command}
        self.exit_code = EXIT_PASS

    def say(self, text: str):
        self.lines.append(text)

    def emit(self, out) -> int:
        for line in self.lines:
            print(line, file=out)
        print(json.dumps(self.doc, sort_keys=True), file=out)
        return self.exit_code


def _commutator_dimension(problem: ProblemFile) -> int:
    """The d for which the file is the d-variable commutator system."""
    quiver = problem.quiver
    names = sorted(quiver.arrow_names())
    d = len(names)
    if len(quiver._vertex_index) != 1 or names != sorted(f"x{i}" for i in
                                                         range(1, d + 1)):
        raise UsageError("quantize needs the commutator system on x1..xd")
    want = {(f"x{j}", f"x{i}") for j in range(2, d + 1) for i in range(1, j)}
    got = {}
    for rule in problem.system.rules:
        got[rule.lhs.arrows] = rule.rhs
    if set(got) != want:
        raise UsageError("quantize needs the rules x_j*x_i -> x_i*x_j, j > i")
    for (xj, xi), rhs in got.items():
        expected = Element.from_path(problem.quiver.path(xi, xj))
        if rhs != expected:
            raise UsageError("quantize needs the rules x_j*x_i -> x_i*x_j")
    return d


def _bivector_from_deform(problem: ProblemFile, d: int) -> PoissonBivector:
    """The hbar-linear part of the deform block as a Poisson bivector."""
    entries: dict[tuple[int, int], Element] = {}
    for s, v in problem.deform_values.items():
        j, i = int(s.arrows[0][1:]), int(s.arrows[1][1:])
        entries[(j, i)] = v.coefficient_of(HBAR, 1).substitute({})
    return PoissonBivector(d, entries, quiver=problem.quiver,
                           system=problem.system)


def _cmd_reduce(problem: ProblemFile, args, flags, report: Report):
    parser = ElementParser(problem.quiver, problem.params, problem.unknowns,
                           trunc=None)
    elem = parser.parse_element(" ".join(args))
    nf = reduce_full(elem, problem.system, flags.budget or problem.budget)
    report.say(f"normal form: {nf!r}")
    report.doc["normal_form"] = repr(nf)


def _cmd_diamond(problem: ProblemFile, args, flags, report: Report):
    result = check_diamond(problem.system, flags.budget or problem.budget)
    report.say(f"diamond: {result.verdict}")
    report.doc["verdict"] = result.verdict
    for amb, status, defect in result.statuses:
        report.doc.setdefault("ambiguities", []).append(
            {"word": repr(amb.word), "status": status,
             "defect": None if defect is None else repr(defect)})
        if status == "failed":
            report.say(f"  {amb.word!r}: defect {defect!r}")
    if result.verdict == "fail":
        report.exit_code = EXIT_FAIL
    elif result.verdict == "inconclusive":
        report.exit_code = EXIT_BUDGET


def _cmd_ambiguities(problem: ProblemFile, args, flags, report: Report):
    S = problem.system.lhs_set()
    ambs = ambiguities_n(S, int(args[0])) if args else overlaps(S)
    report.say(f"count: {len(ambs)}")
    report.doc["count"] = len(ambs)
    report.doc["words"] = []
    for amb in ambs:
        factors = " | ".join(repr(f) for f in amb.factors)
        report.say(f"  {amb.word!r}  ({factors})")
        report.doc["words"].append(repr(amb.word))


def _cmd_irr(problem: ProblemFile, args, flags, report: Report):
    paths = irreducible_paths(problem.system.lhs_set(), problem.quiver,
                              max_len=flags.max_len)
    report.say(f"count: {len(paths)}")
    report.doc["count"] = len(paths)
    report.doc["paths"] = [repr(p) for p in paths]
    for p in paths:
        report.say(f"  {p!r}")


def _cmd_star(problem: ProblemFile, args, flags, report: Report):
    if len(args) != 2:
        raise UsageError("star takes exactly two element arguments")
    cochain = problem.cochain()
    if flags.trunc is not None:
        cochain = DeformationCochain(
            problem.system,
            {s: v.truncated(flags.trunc) for s, v in cochain.values.items()},
            trunc=flags.trunc, formal=cochain.formal)
    parser = ElementParser(problem.quiver, problem.params, problem.unknowns,
                           trunc=cochain.trunc)
    a = parser.parse_element(args[0])
    b = parser.parse_element(args[1])
    result = star(a, b, problem.system, cochain,
                  flags.budget or problem.budget)
    report.say(f"star: {result!r}")
    report.doc["star"] = repr(result)


def _cmd_mc(problem: ProblemFile, args, flags, report: Report):
    result = mc_check(problem.system, problem.cochain(),
                      flags.budget or problem.budget)
    verdict = "pass" if result.verdict else "fail"
    report.say(f"maurer-cartan: {verdict}")
    report.doc["verdict"] = verdict
    report.doc["defects"] = [
        {"word": repr(w), "defect": repr(d)}
        for w, d in result.defects if not d.is_zero()]
    for w, d in result.defects:
        if not d.is_zero():
            report.say(f"  {w!r}: defect {d!r}")
    if not result.verdict:
        report.exit_code = EXIT_FAIL


def _cmd_gauge(problem: ProblemFile, args, flags, report: Report):
    if len(args) != 1:
        raise UsageError("gauge takes one psi-file argument")
    text = _read_input(args[0])
    parser = ElementParser(problem.quiver, problem.params, problem.unknowns,
                           trunc=problem.trunc)
    psi_values: dict[Path, Element] = {}
    primed_values: dict[Path, Element] = {}
    for line_no, line in _logical_lines(text):
        head, _, rest = line.partition(" ")
        lhs, rhs = _split_rule(line_no, rest.strip())
        if head == "gauge":
            psi_values[parser.parse_path(lhs, line_no)] = \
                parser.parse_element(rhs, line_no)
        elif head == "deform":
            primed_values[parser.parse_path(lhs, line_no)] = \
                parser.parse_element(rhs, line_no)
        else:
            raise ParseError(f"unknown directive {head!r} in psi file",
                             line_no)
    cochain = problem.cochain()
    psi = GaugeOnArrows(problem.system, psi_values, trunc=cochain.trunc)
    primed = DeformationCochain(problem.system, primed_values,
                                trunc=cochain.trunc)
    ok = gauge_check(psi, problem.system, cochain, primed,
                     flags.budget or problem.budget)
    report.say(f"gauge: {'pass' if ok else 'fail'}")
    report.doc["verdict"] = "pass" if ok else "fail"
    if not ok:
        report.exit_code = EXIT_FAIL


def _cmd_hh2(problem: ProblemFile, args, flags, report: Report):
    result = hh2(problem.system, bound=flags.cap,
                 budget=flags.budget or problem.budget)
    report.say(f"dimension: {result.dimension}")
    report.doc["dimension"] = result.dimension
    report.doc["representatives"] = []
    for rep in result.representatives:
        entry = {repr(s): repr(v) for s, v in sorted(
            rep.items(), key=lambda kv: kv[0].sort_key())}
        report.doc["representatives"].append(entry)
        pretty = ", ".join(f"{s} -> {v}" for s, v in entry.items())
        report.say(f"  [{pretty}]")


def _cmd_variety(problem: ProblemFile, args, flags, report: Report):
    if flags.cond == "order":
        if problem.order is None:
            raise UsageError("--cond order needs an order block in the file")
        cond = order_condition(problem.order)
    else:
        cond = STRICT
    names = problem.unknowns or None
    eqs = mc_equations(problem.system, cond, names=names,
                       budget=flags.budget or problem.budget)
    report.doc["equations"] = [repr(p) for p in eqs.polys]
    if not eqs.polys:
        report.say("no equations (the variety is the whole space)")
    for p in eqs.polys:
        report.say(f"{p!r} = 0")


def _cmd_complete(problem: ProblemFile, args, flags, report: Report):
    if len(args) != 1:
        raise UsageError("complete takes one relations-file argument")
    if problem.order is None:
        raise UsageError("complete needs an order block in the file")
    parser = ElementParser(problem.quiver, problem.params, problem.unknowns,
                           trunc=None)
    generators = []
    for line_no, line in _logical_lines(_read_input(args[0])):
        head, _, rest = line.partition(" ")
        if head != "rel":
            raise ParseError(f"unknown directive {head!r} in relations file",
                             line_no)
        generators.append(parser.parse_element(rest.strip(), line_no))
    system = complete(generators, problem.order,
                      budget=flags.budget or problem.budget)
    report.say(f"rules: {len(system.rules)}")
    report.doc["rules"] = []
    for rule in sorted(system.rules, key=lambda r: r.lhs.sort_key()):
        report.say(f"  {rule.lhs!r} -> {rule.rhs!r}")
        report.doc["rules"].append({"lhs": repr(rule.lhs),
                                    "rhs": repr(rule.rhs)})


def _cmd_quantize(problem: ProblemFile, args, flags, report: Report):
    if not args:
        raise UsageError("quantize needs a subcommand: "
                         "jacobi | check | graphs k | compare")
    sub = args[0]
    if sub == "graphs":
        if len(args) != 2:
            raise UsageError("quantize graphs takes the stratum k")
        graphs = enumerate_graphs(int(args[1]), cap=flags.cap or 4)
        report.say(f"count: {len(graphs)}")
        report.doc["count"] = len(graphs)
        report.doc["graphs"] = [
            {"targets": g.targets, "orders": g.orders} for g in graphs]
        return
    d = _commutator_dimension(problem)
    if sub == "jacobi":
        eta = _bivector_from_deform(problem, d)
        result = schouten_jacobi_check(eta, flags.budget or problem.budget)
        verdict = "pass" if result.verdict else "fail"
        report.say(f"jacobi: {verdict}")
        report.doc["verdict"] = verdict
        report.doc["defects"] = [
            {"indices": list(ijk), "defect": repr(v)}
            for ijk, v in result.defects if not v.is_zero()]
        for ijk, v in result.defects:
            if not v.is_zero():
                report.say(f"  {ijk}: {v!r}")
        if not result.verdict:
            report.exit_code = EXIT_FAIL
    elif sub == "check":
        result = quantize_check(problem.cochain(), d,
                                trunc=flags.trunc,
                                budget=flags.budget or problem.budget)
        verdict = "pass" if result.verdict else "fail"
        report.say(f"associativity: {verdict}")
        report.doc["verdict"] = verdict
        if not result.verdict:
            report.exit_code = EXIT_FAIL
    elif sub == "compare":
        cochain = problem.cochain()
        trunc = flags.trunc if flags.trunc is not None else min(
            cochain.trunc or 3, 3)
        mismatches = []
        monos = _monomials_up_to(problem.quiver, d, 2)
        for f in monos:
            for g in monos:
                lhs = graphical_star(f, g, cochain, trunc=trunc,
                                     cap=flags.cap or 4,
                                     budget=flags.budget or problem.budget)
                rhs = star(f, g, problem.system, cochain,
                           flags.budget or problem.budget).truncated(trunc)
                if not (lhs - rhs).is_zero():
                    mismatches.append((repr(f), repr(g)))
        verdict = "pass" if not mismatches else "fail"
        report.say(f"compare ({len(monos) ** 2} pairs, order {trunc}): "
                   f"{verdict}")
        report.doc["verdict"] = verdict
        report.doc["pairs"] = len(monos) ** 2
        report.doc["mismatches"] = [list(m) for m in mismatches]
        if mismatches:
            report.exit_code = EXIT_FAIL
    else:
        raise UsageError(f"unknown quantize subcommand {sub!r}")


def _monomials_up_to(quiver: Quiver, d: int, degree: int) -> list[Element]:
    out = []
    exps = [0] * d

    def walk(i: int, left: int):
        if i == d:
            out.append(monomial(quiver, tuple(exps)))
            return
        for e in range(left + 1):
            exps[i] = e
            walk(i + 1, left - e)
        exps[i] = 0

    walk(0, degree)
    return out


_COMMANDS = {
    "reduce": _cmd_reduce,
    "diamond": _cmd_diamond,
    "ambiguities": _cmd_ambiguities,
    "irr": _cmd_irr,
    "star": _cmd_star,
    "mc": _cmd_mc,
    "gauge": _cmd_gauge,
    "hh2": _cmd_hh2,
    "variety": _cmd_variety,
    "complete": _cmd_complete,
    "quantize": _cmd_quantize,
}


def _read_input(source: str) -> str:
    if source == "-":
        return sys.stdin.read()
    with open(source, encoding="utf-8") as f:
        return f.read()


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pathalg",
        description="Exact deformations of path algebras via reduction "
                    "systems.")
    parser.add_argument("file", help="problem file, or - for stdin")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("args", nargs="*",
                        help="command arguments (elements, files, k)")
    parser.add_argument("--trunc", type=int, default=None,
                        help="override the truncation order")
    parser.add_argument("--budget", type=int, default=None,
                        help="override the reduction budget")
    parser.add_argument("--cond", choices=["strict", "order"],
                        default="strict", help="variety degree condition")
    parser.add_argument("--cap", type=int, default=None,
                        help="length bound (hh2) or graph-stratum cap")
    parser.add_argument("--max-len", type=int, default=None,
                        help="length bound for irr")
    parser.add_argument("--threads", type=int, default=1,
                        help="accepted for compatibility; output is "
                             "single-threaded and deterministic")
    return parser


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    try:
        flags = _build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_PASS
    report = Report(flags.command)
    try:
        problem = parse_problem(_read_input(flags.file))
        _COMMANDS[flags.command](problem, flags.args, flags, report)
    except (ParseError, UsageError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=out)
        print(json.dumps({"command": flags.command, "error": str(exc)},
                         sort_keys=True), file=out)
        return EXIT_USAGE
    except BudgetExceeded as exc:
        print(f"budget exhausted after {exc.steps} reductions", file=out)
        print(json.dumps({"command": flags.command,
                          "error": "budget exhausted",
                          "steps": exc.steps}, sort_keys=True), file=out)
        return EXIT_BUDGET
    except CompletionError as exc:
        print(f"completion did not converge: {exc}", file=out)
        print(json.dumps({"command": flags.command,
                          "error": "completion did not converge"},
                         sort_keys=True), file=out)
        return EXIT_BUDGET
    return report.emit(out)


if __name__ == "__main__":
    sys.exit(main())
