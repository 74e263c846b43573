"""Reduction systems: right-most rewriting, ambiguities, confluence, completion.

A reduction system is a finite set of rules (s, phi_s) whose left sides are
pairwise non-subword paths of length >= 2.  Rewriting replaces the right-most
occurrence of a left side and iterates to a normal form; confluence is checked
on overlap ambiguities and a Buchberger-style completion builds a confluent
system from uniform relations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .quiver_core import (
    AdmissibleOrder,
    Element,
    Path,
    PolyScalar,
    Quiver,
    UsageError,
    compose,
)

__all__ = [
    "Rule",
    "ReductionSystem",
    "SplitResult",
    "Ambiguity",
    "DiamondReport",
    "BudgetExceeded",
    "CompletionError",
    "is_irreducible",
    "rightmost_split",
    "reduce_step",
    "reduce_full",
    "overlaps",
    "ambiguities_n",
    "irreducible_paths",
    "check_diamond",
    "complete",
]

DEFAULT_BUDGET = 10**6


class BudgetExceeded(RuntimeError):
    """Reduction budget ran out; carries the partially reduced element."""

    def __init__(self, partial: Element, steps: int):
        super().__init__(f"reduction budget exceeded after {steps} steps")
        self.partial = partial
        self.steps = steps


class CompletionError(RuntimeError):
    """Completion gave up; carries the outstanding overlap words."""

    def __init__(self, message: str, outstanding: list[Path]):
        super().__init__(message)
        self.outstanding = outstanding


@dataclass(frozen=True)
class Rule:
    lhs: Path
    rhs: Element

    def __post_init__(self):
        if len(self.lhs) < 2:
            raise UsageError(f"rule left side must have length >= 2: {self.lhs!r}")
        for p in self.rhs.terms:
            if (p.source, p.target) != (self.lhs.source, self.lhs.target):
                raise UsageError(f"rule {self.lhs!r}: right side not parallel ({p!r})")


@dataclass(frozen=True)
class SplitResult:
    q: Path
    s: Path
    r: Path


@dataclass(frozen=True)
class Ambiguity:
    """An overlap word with its factorization witness.

    For plain overlaps the factors are (u, v, w) with uv, vw both left sides;
    in general they are the chain decomposition (u0, ..., u_{n+1}).
    """

    word: Path
    factors: tuple[Path, ...]


@dataclass
class DiamondReport:
    # status strings: "resolved", "failed" (carries the defect), "budget"
    statuses: list[tuple[Ambiguity, str, Element | None]] = field(default_factory=list)

    @property
    def verdict(self) -> str:
        if any(st == "budget" for _, st, _ in self.statuses):
            return "inconclusive"
        if any(st == "failed" for _, st, _ in self.statuses):
            return "fail"
        return "pass"


def _is_subword(small: tuple, big: tuple) -> bool:
    n = len(small)
    return any(big[i:i + n] == small for i in range(len(big) - n + 1))


class ReductionSystem:
    def __init__(self, quiver: Quiver, rules: list[Rule], validate: bool = True):
        self.quiver = quiver
        self.rules = list(rules)
        self.by_lhs: dict[Path, Rule] = {}
        for rule in self.rules:
            if rule.lhs in self.by_lhs:
                raise UsageError(f"duplicate rule for {rule.lhs!r}")
            self.by_lhs[rule.lhs] = rule
        if validate:
            words = [r.lhs.arrows for r in self.rules]
            for i, w in enumerate(words):
                for j, w2 in enumerate(words):
                    if i != j and _is_subword(w, w2):
                        raise UsageError(
                            f"left side {self.rules[i].lhs!r} is a subpath of {self.rules[j].lhs!r}")
            S = self.lhs_set()
            for rule in self.rules:
                for p in rule.rhs.terms:
                    if not is_irreducible(p, S):
                        raise UsageError(f"rule {rule.lhs!r}: right side term {p!r} is reducible")

    def lhs_set(self) -> list[Path]:
        return [r.lhs for r in self.rules]

    def __repr__(self):
        return f"ReductionSystem({len(self.rules)} rules)"


def is_irreducible(p: Path, S: list[Path]) -> bool:
    """True iff no contiguous subword of p is a rule left side."""
    if p.is_trivial:
        return True
    w = p.arrows
    return not any(_is_subword(s.arrows, w) for s in S)


def rightmost_split(p: Path, S: list[Path]) -> SplitResult | None:
    """The right-most occurrence of an S-word inside p, or None."""
    if p.is_trivial:
        return None
    w = p.arrows
    best: tuple[int, Path] | None = None
    for s in S:
        n = len(s)
        for i in range(len(w) - n, -1, -1):
            if w[i:i + n] == s.arrows:
                if best is None or i > best[0]:
                    best = (i, s)
                break
    if best is None:
        return None
    i, s = best
    return SplitResult(p.subword(0, i), s, p.subword(i + len(s), len(w)))


def _replacement_terms(quiver, split: SplitResult, rhs: Element, c: PolyScalar):
    """Terms of q * rhs * r scaled by c, built by direct concatenation.

    The factors are composable by construction (every rhs term is parallel to
    the reducible word it replaces), so validation is skipped.
    """
    q, r = split.q, split.r
    for m, cm in rhs.terms.items():
        coeff = cm * c
        if coeff.is_zero():
            continue
        arrows = q.arrows + m.arrows + r.arrows
        if arrows:
            yield Path._trusted(quiver, arrows, None), coeff
        else:
            yield Path._trusted(quiver, (), q.vertex), coeff


def reduce_step(a: Element, R: ReductionSystem) -> Element:
    """One right-most basic reduction applied to every reducible basis path."""
    S = R.lhs_set()
    out: dict[Path, PolyScalar] = {}
    for p, c in a.terms.items():
        split = rightmost_split(p, S)
        if split is None:
            items = [(p, c)]
        else:
            rhs = R.by_lhs[split.s].rhs
            items = _replacement_terms(a.quiver, split, rhs, c)
        for q, cq in items:
            if q in out:
                cq = out[q] + cq
                if cq.is_zero():
                    del out[q]
                    continue
            out[q] = cq
    return Element(a.quiver, out)


def reduce_full(a: Element, R: ReductionSystem, budget: int = DEFAULT_BUDGET) -> Element:
    """Iterate right-most reductions to the normal form (or raise BudgetExceeded)."""
    if budget <= 0:
        raise UsageError("budget must be positive")
    S = R.lhs_set()
    quiver = a.quiver
    done: dict[Path, PolyScalar] = {}
    pending = dict(a.terms)
    steps = 0
    while pending:
        p, c = pending.popitem()
        split = rightmost_split(p, S)
        if split is None:
            if p in done:
                c = done[p] + c
                if c.is_zero():
                    del done[p]
                    continue
            done[p] = c
            continue
        steps += 1
        if steps > budget:
            partial = Element(quiver, done) + Element(quiver, pending) + Element(quiver, {p: c})
            raise BudgetExceeded(partial, steps - 1)
        rhs = R.by_lhs[split.s].rhs
        for q, cq in _replacement_terms(quiver, split, rhs, c):
            if q in pending:
                cq = pending[q] + cq
                if cq.is_zero():
                    del pending[q]
                    continue
            pending[q] = cq
    return Element(quiver, done)


# ---------------------------------------------------------------------------
# Ambiguities
# ---------------------------------------------------------------------------

def overlaps(S: list[Path]) -> list[Ambiguity]:
    """All overlap words uvw with uv and vw both in S, deterministically ordered."""
    out = []
    seen = set()
    for s1 in S:
        for s2 in S:
            w1, w2 = s1.arrows, s2.arrows
            # nonempty proper suffix of s1 equal to a nonempty proper prefix of s2
            for k in range(1, min(len(w1), len(w2))):
                if w1[len(w1) - k:] == w2[:k]:
                    word = Path(s1.quiver, arrows=w1 + w2[k:])
                    u = word.subword(0, len(w1) - k)
                    v = word.subword(len(w1) - k, len(w1))
                    w = word.subword(len(w1), len(word))
                    key = (word.arrows, len(u), len(v), len(w))
                    if key not in seen:
                        seen.add(key)
                        out.append(Ambiguity(word, (u, v, w)))
    out.sort(key=lambda amb: (amb.word.sort_key(), tuple(len(f) for f in amb.factors)))
    return out


def ambiguities_n(S: list[Path], n: int) -> list[Ambiguity]:
    """The chain ambiguities on n+2 factors (n=0 returns S itself).

    An ambiguity is a word u0 u1 ... u_{n+1} where u0 is a single arrow, each
    u_i is irreducible, each product u_i u_{i+1} is reducible, and u_i d is
    irreducible for every proper left subpath d of u_{i+1}.
    """
    if n < 0:
        raise UsageError("n must be >= 0")
    if not S:
        return []
    quiver = S[0].quiver
    out: list[Ambiguity] = []
    seen = set()
    if n == 0:
        for s in S:
            key = (s.arrows, (1, len(s) - 1))
            if key not in seen:
                seen.add(key)
                out.append(Ambiguity(s, (s.subword(0, 1), s.subword(1, len(s)))))
        out.sort(key=lambda amb: (amb.word.sort_key(), tuple(len(f) for f in amb.factors)))
        return out

    def extend(chain: list[Path]):
        if len(chain) == n + 2:
            word = chain[0]
            for piece in chain[1:]:
                word = compose(word, piece)
            key = (word.arrows, tuple(len(c) for c in chain))
            if key not in seen:
                seen.add(key)
                out.append(Ambiguity(word, tuple(chain)))
            return
        last = chain[-1]
        w = last.arrows
        for s in S:
            sw = s.arrows
            # s = (nonempty suffix of last) + u_next with u_next nonempty
            for k in range(1, min(len(w), len(sw) - 1) + 1):
                if w[len(w) - k:] != sw[:k]:
                    continue
                u_next = Path(quiver, arrows=sw[k:])
                if not is_irreducible(u_next, S):
                    continue
                # last * d must stay irreducible for every proper left subpath d
                ok = True
                for dlen in range(0, len(u_next)):
                    cand = Path(quiver, arrows=w + u_next.arrows[:dlen])
                    if not is_irreducible(cand, S):
                        ok = False
                        break
                if ok:
                    extend(chain + [u_next])

    for arrow, _, _ in quiver.arrows:
        extend([quiver.path(arrow)])
    out.sort(key=lambda amb: (amb.word.sort_key(), tuple(len(f) for f in amb.factors)))
    return out


def irreducible_paths(S: list[Path], quiver: Quiver, max_len: int | None = None,
                      safety_cap: int = 100_000) -> list[Path]:
    """All irreducible paths of length <= max_len (None = all, if finite).

    Every subpath of an irreducible path is irreducible, so the enumeration
    stops as soon as some length has no irreducible paths.  An unbounded
    request on a system with infinitely many irreducibles hits the safety cap
    and raises a usage error.
    """
    if max_len is not None and max_len < 0:
        raise UsageError("max_len must be >= 0")
    out: list[Path] = list(quiver.idempotents())
    layer: list[Path] = list(out)
    length = 0
    while max_len is None or length < max_len:
        nxt = []
        for p in layer:
            for a in quiver.arrows_from(p.target):
                q = compose(p, quiver.path(a))
                if q is not None and is_irreducible(q, S):
                    nxt.append(q)
        if not nxt:
            break
        out.extend(nxt)
        layer = nxt
        length += 1
        if max_len is None and len(out) > safety_cap:
            raise UsageError("cannot certify a finite irreducible basis; pass max_len")
    out.sort(key=lambda p: p.sort_key())
    return out


# ---------------------------------------------------------------------------
# Diamond check and completion
# ---------------------------------------------------------------------------

def check_diamond(R: ReductionSystem, budget: int = DEFAULT_BUDGET) -> DiamondReport:
    """Resolve every overlap ambiguity both ways and compare normal forms."""
    report = DiamondReport()
    for amb in overlaps(R.lhs_set()):
        u, v, w = amb.factors
        uv = compose(u, v)
        vw = compose(v, w)
        left = R.by_lhs[uv].rhs * Element.from_path(w)
        right = Element.from_path(u) * R.by_lhs[vw].rhs
        try:
            diff = reduce_full(left, R, budget) - reduce_full(right, R, budget)
        except BudgetExceeded:
            report.statuses.append((amb, "budget", None))
            continue
        if diff.is_zero():
            report.statuses.append((amb, "resolved", None))
        else:
            report.statuses.append((amb, "failed", diff))
    return report


def _tip(f: Element, order: AdmissibleOrder) -> Path:
    return max(f.terms, key=order.key)


def _orient(f: Element, order: AdmissibleOrder) -> Rule:
    """Orient a uniform relation by its tip, normalized to leading coefficient 1."""
    tip = _tip(f, order)
    c = f.terms[tip]
    if not c.is_rational():
        raise UsageError("completion requires rational leading coefficients")
    rest = Element(f.quiver, {p: cc for p, cc in f.terms.items() if p != tip})
    return Rule(tip, (-rest).scale(PolyScalar.rational(Fraction(1) / c.as_rational())))


def _interreduce(relations: list[Element], order: AdmissibleOrder,
                 budget: int) -> list[Element]:
    """Reduce each relation against the others until nothing changes."""
    rels = [r for r in relations if not r.is_zero()]
    for _ in range(1000):
        rels.sort(key=lambda r: order.key(_tip(r, order)))
        # merge relations sharing a tip
        merged: list[Element] = []
        by_tip: dict[Path, int] = {}
        for r in rels:
            tip = _tip(r, order)
            if tip in by_tip:
                prev = merged[by_tip[tip]]
                ratio = r.terms[tip].as_rational() / prev.terms[tip].as_rational()
                diff = r - prev.scale(PolyScalar.rational(ratio))
                if not diff.is_zero():
                    merged.append(diff)
            else:
                by_tip[tip] = len(merged)
                merged.append(r)
        rels = sorted(merged, key=lambda r: order.key(_tip(r, order)))
        changed = False
        new_rels: list[Element] = []
        for idx, r in enumerate(rels):
            others = new_rels + rels[idx + 1:]
            rules = {}
            for o in others:
                rule = _orient(o, order)
                rules.setdefault(rule.lhs, rule)
            system = ReductionSystem(r.quiver, list(rules.values()), validate=False)
            rr = reduce_full(r, system, budget)
            if rr != r:
                changed = True
            if not rr.is_zero():
                new_rels.append(rr)
        rels = new_rels
        if not changed:
            return rels
    raise UsageError("inter-reduction did not stabilize")


def complete(generators: list[Element], order: AdmissibleOrder,
             max_rounds: int = 50, budget: int = DEFAULT_BUDGET) -> ReductionSystem:
    """Buchberger-style completion of uniform relations into a confluent system."""
    quiver = order.quiver
    for g in generators:
        if not g.is_uniform():
            raise UsageError("completion generators must be uniform (parallel paths)")
    relations = [g for g in generators if not g.is_zero()]
    system = None
    for _ in range(max_rounds):
        relations = _interreduce(relations, order, budget)
        for r in relations:
            if len(_tip(r, order)) < 2:
                raise UsageError(f"relation with tip of length < 2: {_tip(r, order)!r}")
        system = ReductionSystem(quiver, [_orient(r, order) for r in relations])
        report = check_diamond(system, budget)
        if report.verdict == "pass":
            return system
        if report.verdict == "inconclusive":
            raise BudgetExceeded(Element.zero(quiver), budget)
        for amb, status, defect in report.statuses:
            if status == "failed" and defect is not None:
                relations.append(defect)
    outstanding = [amb.word for amb, st, _ in check_diamond(system, budget).statuses
                   if st != "resolved"]
    raise CompletionError("completion did not converge", outstanding)
