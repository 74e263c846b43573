"""The combinatorial star product, Maurer-Cartan checks and gauge verification.

The star product of two normal forms is computed by multiplying them in the
path algebra and rewriting with the deformed rules s -> phi_s + z*phitilde_s,
where z is an internal bookkeeping symbol counting how often the deformation
part was used.  Setting z = 1 gives the full product; the coefficient of z^k
is the k-th stratum.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .quiver_core import Element, Path, PolyScalar, UsageError
from .reduction_engine import (
    DEFAULT_BUDGET,
    ReductionSystem,
    Rule,
    is_irreducible,
    overlaps,
    reduce_full,
)

__all__ = [
    "Z_SYMBOL",
    "DeformationCochain",
    "GaugeOnArrows",
    "McReport",
    "star",
    "star_k",
    "mc_check",
    "gauge_check",
]

Z_SYMBOL = "_z"  # reserved internal bookkeeping symbol


class DeformationCochain:
    """A map s -> phitilde_s on the rule left sides, with truncation order.

    Values must be parallel to s and irreducible.  In the formal setting every
    term must lie in the maximal ideal (strictly positive parameter degree);
    pass ``formal=False`` for the algebraized regime where termination comes
    from a degree condition instead of truncation.
    """

    def __init__(self, system: ReductionSystem, values: dict[Path, Element],
                 trunc: int | None = 4, formal: bool = True):
        self.system = system
        self.trunc = trunc
        self.formal = formal
        S = system.lhs_set()
        vals: dict[Path, Element] = {}
        for s, v in values.items():
            if s not in system.by_lhs:
                raise UsageError(f"{s!r} is not a rule left side")
            for p, c in v.terms.items():
                if (p.source, p.target) != (s.source, s.target):
                    raise UsageError(f"cochain value for {s!r} not parallel: {p!r}")
                if not is_irreducible(p, S):
                    raise UsageError(f"cochain value for {s!r} has reducible term {p!r}")
                if Z_SYMBOL in c.symbols():
                    raise UsageError(f"symbol {Z_SYMBOL!r} is reserved")
                if formal and c.min_param_degree() < 1:
                    raise UsageError(
                        f"cochain value for {s!r} has a parameter-degree-0 term")
            if not v.is_zero():
                vals[s] = v.truncated(trunc)
        self.values = vals
        if formal and trunc is None:
            raise UsageError("formal deformations need a finite truncation order")
        self._deformed = self._build_deformed()

    def value(self, s: Path) -> Element:
        return self.values.get(s, Element.zero(self.system.quiver))

    def _build_deformed(self) -> ReductionSystem:
        z = PolyScalar.var(Z_SYMBOL)
        rules = []
        for rule in self.system.rules:
            rhs = rule.rhs + self.value(rule.lhs).scale(z)
            rules.append(Rule(rule.lhs, rhs.truncated(self.trunc)))
        return ReductionSystem(self.system.quiver, rules)

    def __repr__(self):
        return f"DeformationCochain({len(self.values)} values, trunc={self.trunc})"


class GaugeOnArrows:
    """psi: arrows -> elements of positive parameter degree; T(x) = x + psi(x)."""

    def __init__(self, system: ReductionSystem, values: dict[Path, Element],
                 trunc: int | None = 4):
        self.system = system
        self.trunc = trunc
        S = system.lhs_set()
        vals: dict[Path, Element] = {}
        for x, v in values.items():
            if len(x) != 1:
                raise UsageError(f"gauge values are indexed by arrows, got {x!r}")
            for p, c in v.terms.items():
                if (p.source, p.target) != (x.source, x.target):
                    raise UsageError(f"gauge value for {x!r} not parallel: {p!r}")
                if not is_irreducible(p, S):
                    raise UsageError(f"gauge value for {x!r} has reducible term {p!r}")
                if c.min_param_degree() < 1:
                    raise UsageError(f"gauge value for {x!r} has a parameter-degree-0 term")
            if not v.is_zero():
                vals[x] = v.truncated(trunc)
        self.values = vals

    def t_of_arrow(self, x: Path) -> Element:
        return Element.from_path(x) + self.values.get(x, Element.zero(self.system.quiver))


def _strip_z(a: Element) -> Element:
    return a.substitute({Z_SYMBOL: PolyScalar.rational(1)})


def star(a: Element, b: Element, R: ReductionSystem, cochain: DeformationCochain,
         budget: int = DEFAULT_BUDGET) -> Element:
    """a * b followed by deformed reduction to normal form, all strata summed."""
    if cochain.system is not R and cochain.system.by_lhs.keys() != R.by_lhs.keys():
        raise UsageError("cochain does not belong to this reduction system")
    prod = (a * b).truncated(cochain.trunc)
    red = reduce_full(prod, cochain._deformed, budget)
    return _strip_z(red).truncated(cochain.trunc)


def star_k(a: Element, b: Element, R: ReductionSystem, cochain: DeformationCochain,
           k: int, budget: int = DEFAULT_BUDGET) -> Element:
    """The stratum of the star product using the deformation part exactly k times."""
    if k < 0:
        raise UsageError("k must be >= 0")
    prod = (a * b).truncated(cochain.trunc)
    red = reduce_full(prod, cochain._deformed, budget)
    return red.coefficient_of(Z_SYMBOL, k).truncated(cochain.trunc)


@dataclass
class McReport:
    defects: list[tuple[Path, Element]] = field(default_factory=list)

    @property
    def verdict(self) -> bool:
        return all(d.is_zero() for _, d in self.defects)


def mc_check(R: ReductionSystem, cochain: DeformationCochain,
             budget: int = DEFAULT_BUDGET) -> McReport:
    """Associativity of the star product on every overlap word uvw."""
    report = McReport()
    for amb in overlaps(R.lhs_set()):
        u, v, w = (Element.from_path(f) for f in amb.factors)
        left = star(star(u, v, R, cochain, budget), w, R, cochain, budget)
        right = star(u, star(v, w, R, cochain, budget), R, cochain, budget)
        report.defects.append((amb.word, left - right))
    return report


def _t_of_element(a: Element, psi: GaugeOnArrows, R: ReductionSystem,
                  cochain: DeformationCochain, budget: int) -> Element:
    """Extend T(x) = x + psi(x) multiplicatively (via star) and linearly."""
    quiver = a.quiver
    out = Element.zero(quiver)
    for p, c in a.terms.items():
        if p.is_trivial:
            term = Element.from_path(p)
        else:
            term = psi.t_of_arrow(p.subword(0, 1))
            for i in range(1, len(p)):
                term = star(term, psi.t_of_arrow(p.subword(i, i + 1)), R, cochain, budget)
        out = out + term.scale(c)
    return out.truncated(cochain.trunc)


def gauge_check(psi: GaugeOnArrows, R: ReductionSystem,
                cochain: DeformationCochain, cochain_prime: DeformationCochain,
                budget: int = DEFAULT_BUDGET) -> bool:
    """Verify that T = id + psi carries the primed deformation to the unprimed one.

    For every rule left side s = x1...xm this checks
    T(phi_s + phitilde'_s) = red_deformed(T(x1) ... T(xm)) up to the truncation
    order, with T extended multiplicatively through the unprimed star product.
    """
    trunc = cochain.trunc
    for rule in R.rules:
        s = rule.lhs
        lhs_arg = rule.rhs + cochain_prime.value(s)
        lhs = _t_of_element(lhs_arg, psi, R, cochain, budget)
        prod = psi.t_of_arrow(s.subword(0, 1))
        for i in range(1, len(s)):
            prod = prod * psi.t_of_arrow(s.subword(i, i + 1))
        red = _strip_z(reduce_full(prod.truncated(trunc), cochain._deformed, budget))
        if not (lhs - red).truncated(trunc).is_zero():
            return False
    return True
