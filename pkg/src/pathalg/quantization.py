"""Deformation quantization of polynomial algebras.

The polynomial algebra k[x_1..x_d] is presented as the path algebra of a
one-vertex quiver with arrows x1..xd modulo the commutator reduction system
x_j x_i -> x_i x_j (j > i), whose irreducible paths are the weakly increasing
monomials.  A Poisson bivector gives a first-order deformation cochain
phitilde(x_j x_i) = eta_ji * hbar, and the star product specializes to a
quantization exactly when associativity holds on decreasing generator
triples.

The graphical calculus expresses each stratum of the star product as a sum of
bidifferential operators indexed by acyclic Kontsevich-type graphs with
ordered incoming edges.  Evaluation sums over the realizable insertion
placements of a graph and over all index labelings compatible with the
orderings, with divided derivatives.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial

from .quiver_core import Element, Path, PolyScalar, Quiver, UsageError
from .reduction_engine import DEFAULT_BUDGET, ReductionSystem, Rule, reduce_full
from .star_product import DeformationCochain

__all__ = [
    "HBAR",
    "F_SLOT",
    "G_SLOT",
    "commutator_system",
    "monomial",
    "poly_diff",
    "PoissonBivector",
    "schouten_jacobi_check",
    "poisson_to_cochain",
    "quantize_check",
    "KGraph",
    "enumerate_graphs",
    "eval_graph",
    "graphical_star",
    "moyal",
    "gauge_phi",
]

HBAR = "hbar"  # the quantization parameter

# external graph slots: the left and right factor of the product
F_SLOT = -1
G_SLOT = -2


@lru_cache(maxsize=None)
def commutator_system(d: int) -> tuple[Quiver, ReductionSystem]:
    """k[x1..xd] as a one-vertex quiver with rules x_j x_i -> x_i x_j (j > i).

    Cached so repeated calls share one quiver object: elements only combine
    when they belong to the same quiver instance.
    """
    if d < 1:
        raise UsageError("dimension must be at least 1")
    quiver = Quiver(["0"], [(f"x{i}", "0", "0") for i in range(1, d + 1)])
    rules = [Rule(quiver.path(f"x{j}", f"x{i}"),
                  Element.from_path(quiver.path(f"x{i}", f"x{j}")))
             for j in range(2, d + 1) for i in range(1, j)]
    return quiver, ReductionSystem(quiver, rules)


def monomial(quiver: Quiver, exponents: dict[int, int] | tuple[int, ...],
             coeff: PolyScalar | None = None) -> Element:
    """The normal-form monomial prod x_i^{e_i}."""
    if not isinstance(exponents, dict):
        exponents = {i + 1: e for i, e in enumerate(exponents)}
    arrows = [f"x{i}" for i in sorted(exponents) for _ in range(exponents[i])]
    path = quiver.path(*arrows) if arrows else quiver.trivial("0")
    return Element.from_path(path, coeff)


def _exponents(p: Path) -> dict[str, int]:
    exps: dict[str, int] = {}
    for a in p.arrows:
        exps[a] = exps.get(a, 0) + 1
    return exps


def poly_diff(a: Element, i: int) -> Element:
    """d/dx_i of a normal-form polynomial."""
    name = f"x{i}"
    quiver = a.quiver
    out = Element.zero(quiver)
    for p, c in a.terms.items():
        exps = _exponents(p)
        m = exps.get(name, 0)
        if m == 0:
            continue
        arrows = list(p.arrows)
        arrows.remove(name)
        q = quiver.path(*arrows) if arrows else quiver.trivial("0")
        out = out + Element.from_path(q, c.scale(m))
    return out


def _poly_mul(a: Element, b: Element, R: ReductionSystem,
              budget: int = DEFAULT_BUDGET) -> Element:
    """Product of normal-form polynomials by exponent merging.

    Equivalent to multiplying in the path algebra and reducing with the
    commutator rules, but without the rewriting detour.
    """
    quiver = a.quiver
    terms: dict[Path, PolyScalar] = {}
    for p, c in a.terms.items():
        for q, e in b.terms.items():
            arrows = sorted(p.arrows + q.arrows, key=lambda n: int(n[1:]))
            path = quiver.path(*arrows) if arrows else quiver.trivial("0")
            coeff = c * e
            terms[path] = terms[path] + coeff if path in terms else coeff
    return Element(quiver, terms)


class PoissonBivector:
    """eta = sum_{i<j} eta_ji d/dx_j ^ d/dx_i with polynomial coefficients.

    Entries are indexed (j, i) with j > i and are normal-form Elements of the
    commutator system.
    """

    def __init__(self, d: int, entries: dict[tuple[int, int], Element],
                 quiver: Quiver | None = None, system: ReductionSystem | None = None):
        if quiver is None or system is None:
            quiver, system = commutator_system(d)
        self.d = d
        self.quiver = quiver
        self.system = system
        self.entries: dict[tuple[int, int], Element] = {}
        for (j, i), v in entries.items():
            if not (1 <= i < j <= d):
                raise UsageError(f"entry ({j}, {i}) must have 1 <= i < j <= d")
            if not v.is_zero():
                self.entries[(j, i)] = reduce_full(v, system)

    def entry(self, j: int, i: int) -> Element:
        """pi^{ji} for any pair, using antisymmetry."""
        if j == i:
            return Element.zero(self.quiver)
        if j > i:
            return self.entries.get((j, i), Element.zero(self.quiver))
        return -self.entries.get((i, j), Element.zero(self.quiver))

    def is_constant(self) -> bool:
        return all(p.is_trivial for v in self.entries.values() for p in v.paths())

    def __repr__(self):
        body = ", ".join(f"eta_{j}{i}={v!r}" for (j, i), v in sorted(self.entries.items()))
        return f"PoissonBivector(d={self.d}, {body})"


@dataclass
class JacobiReport:
    defects: list[tuple[tuple[int, int, int], Element]]

    @property
    def verdict(self) -> bool:
        return all(v.is_zero() for _, v in self.defects)


def schouten_jacobi_check(eta: PoissonBivector,
                          budget: int = DEFAULT_BUDGET) -> JacobiReport:
    """[eta, eta] = 0: the standard trivector formula, componentwise.

    For each i < j < k the component is
    sum_l pi^{li} d_l pi^{jk} + pi^{lj} d_l pi^{ki} + pi^{lk} d_l pi^{ij}.
    """
    R = eta.system
    defects = []
    for i, j, k in itertools.combinations(range(1, eta.d + 1), 3):
        total = Element.zero(eta.quiver)
        for l in range(1, eta.d + 1):
            for (a, b, c) in ((i, j, k), (j, k, i), (k, i, j)):
                total = total + _poly_mul(eta.entry(l, a),
                                          poly_diff(eta.entry(b, c), l), R, budget)
        defects.append(((i, j, k), total))
    return JacobiReport(defects)


def poisson_to_cochain(eta: PoissonBivector, trunc: int = 4) -> DeformationCochain:
    """First-order cochain phitilde(x_j x_i) = eta_ji * hbar."""
    hbar = PolyScalar.var(HBAR, is_param=True, trunc=trunc)
    values = {}
    for (j, i), v in eta.entries.items():
        s = eta.quiver.path(f"x{j}", f"x{i}")
        values[s] = v.scale(hbar)
    return DeformationCochain(eta.system, values, trunc=trunc)


def quantize_check(cochain: DeformationCochain, d: int,
                   trunc: int | None = None,
                   budget: int = DEFAULT_BUDGET):
    """Associativity on all strictly decreasing generator triples x_k, x_j, x_i.

    This is the Maurer-Cartan check for the commutator system: its overlap
    words are exactly x_k x_j x_i with k > j > i.
    """
    from .star_product import mc_check

    if trunc is not None and trunc != cochain.trunc:
        values = {s: v.truncated(trunc) for s, v in cochain.values.items()}
        cochain = DeformationCochain(cochain.system, values, trunc=trunc,
                                     formal=cochain.formal)
    return mc_check(cochain.system, cochain, budget)


# ---------------------------------------------------------------------------
# graphs


@dataclass(frozen=True)
class KGraph:
    """An acyclic graph on k internal vertices with two ordered external slots.

    ``targets[v]`` is the sorted pair of endpoints of the two outgoing edges
    of internal vertex v (internal vertices are 0..k-1, the external slots
    are F_SLOT and G_SLOT).  ``orders[n]`` lists the sources of the incoming
    edges of node n in their fixed total order.
    """

    k: int
    targets: tuple[tuple[int, int], ...]
    orders: tuple[tuple[int, tuple[int, ...]], ...]

    def __post_init__(self):
        if len(self.targets) != self.k:
            raise UsageError("need exactly one target pair per internal vertex")
        incoming: dict[int, int] = {}
        for v, (a, b) in enumerate(self.targets):
            if a == b:
                raise UsageError(f"vertex {v} has parallel edges")
            for t in (a, b):
                if t == v:
                    raise UsageError(f"vertex {v} has a loop")
                if not (t in (F_SLOT, G_SLOT) or 0 <= t < self.k):
                    raise UsageError(f"vertex {v} has an invalid target {t}")
                incoming[t] = incoming.get(t, 0) + 1
        order_map = dict(self.orders)
        for n, srcs in order_map.items():
            if sorted(srcs) != sorted(v for v, pair in enumerate(self.targets)
                                      if n in pair):
                raise UsageError(f"order at node {n} does not list its incoming edges")
        if set(order_map) != {n for n in incoming}:
            raise UsageError("orders must cover exactly the nodes with incoming edges")
        if self._has_cycle():
            raise UsageError("graph has an oriented cycle")

    def _has_cycle(self) -> bool:
        state: dict[int, int] = {}

        def visit(v: int) -> bool:
            state[v] = 1
            for t in self.targets[v]:
                if t < 0:
                    continue
                if state.get(t) == 1 or (state.get(t) is None and visit(t)):
                    return True
            state[v] = 2
            return False

        return any(visit(v) for v in range(self.k) if state.get(v) is None)

    def order_at(self, n: int) -> tuple[int, ...]:
        return dict(self.orders).get(n, ())


def _canonical_key(k, targets, orders):
    nodes = list(range(k)) + [F_SLOT, G_SLOT]
    best = None
    for perm in itertools.permutations(range(k)):
        relabel = {i: perm[i] for i in range(k)}
        relabel[F_SLOT] = F_SLOT
        relabel[G_SLOT] = G_SLOT
        enc_t = tuple(pair for _, pair in sorted(
            (relabel[v], tuple(sorted((relabel[a], relabel[b]))))
            for v, (a, b) in enumerate(targets)))
        enc_o = tuple(sorted((relabel[n], tuple(relabel[s] for s in srcs))
                             for n, srcs in orders))
        key = (enc_t, enc_o)
        if best is None or key < best:
            best = (enc_t, enc_o)
            best_perm = relabel
    return best, best_perm


def _canonicalize(k, targets, orders) -> KGraph:
    (enc_t, enc_o), _ = _canonical_key(k, targets, orders)
    return KGraph(k=k, targets=enc_t, orders=enc_o)


def enumerate_graphs(k: int, cap: int = 4) -> list[KGraph]:
    """All graphs in the k-th stratum, canonical and isomorphism-free."""
    if k < 1:
        raise UsageError("k must be at least 1")
    if k > cap:
        raise UsageError(f"k={k} exceeds the enumeration cap {cap}")
    return list(_enumerate_graphs_cached(k))


@lru_cache(maxsize=None)
def _enumerate_graphs_cached(k: int) -> tuple[KGraph, ...]:
    nodes = list(range(k)) + [F_SLOT, G_SLOT]
    seen: dict = {}
    target_choices = [list(itertools.combinations([n for n in nodes if n != v], 2))
                      for v in range(k)]
    for combo in itertools.product(*target_choices):
        targets = tuple(tuple(sorted(pair)) for pair in combo)
        incoming: dict[int, list[int]] = {}
        for v, pair in enumerate(targets):
            for t in pair:
                incoming.setdefault(t, []).append(v)
        try:
            order_space = [
                [(n, perm) for perm in itertools.permutations(srcs)]
                for n, srcs in sorted(incoming.items())
            ]
            for orders in itertools.product(*order_space):
                graph = _canonicalize(k, targets, tuple(orders))
                seen.setdefault((graph.targets, graph.orders), graph)
        except UsageError:
            continue
    return tuple(seen[key] for key in sorted(seen))


# ---------------------------------------------------------------------------
# realizability of insertion placements

# An insertion placement assigns to every internal vertex which of its two
# outgoing edges consumes the left letter (the "j" leg) of a descent.  For a
# fixed placement and index labeling the right-most reductions of a word with
# one letter per edge are replayed symbolically: each letter carries the
# variable index of its edge, the right-most descent is forced, and the only
# branch at each step is "commute" versus "insert the designated vertex".
# The number of complete replays is the multiplicity of the labeled graph in
# the star product.


@lru_cache(maxsize=None)
def _history_count(k: int, out_j: tuple[int, ...], out_i: tuple[int, ...],
                   orders: tuple, labels: tuple[tuple[int, int], ...]) -> int:
    order_map = dict(orders)

    def value(letter):
        v, n = letter
        return labels[v][0] if out_j[v] == n else labels[v][1]

    fire_pair = {v: ((v, out_j[v]), (v, out_i[v])) for v in range(k)}
    emission = {v: tuple((w, v) for w in order_map.get(v, ())) for v in range(k)}
    init = (tuple((v, F_SLOT) for v in order_map.get(F_SLOT, ()))
            + tuple((v, G_SLOT) for v in order_map.get(G_SLOT, ())))

    memo: dict = {}

    def count(word, fired) -> int:
        if len(fired) == k:
            return 1
        key = (word, fired)
        if key in memo:
            return memo[key]
        p = next((q for q in range(len(word) - 2, -1, -1)
                  if value(word[q]) > value(word[q + 1])), None)
        total = 0
        if p is not None:
            a, b = word[p], word[p + 1]
            total += count(word[:p] + (b, a) + word[p + 2:], fired)
            for v in range(k):
                if v not in fired and (a, b) == fire_pair[v]:
                    total += count(word[:p] + emission[v] + word[p + 2:],
                                   fired | frozenset((v,)))
        memo[key] = total
        return total

    return count(init, frozenset())


# ---------------------------------------------------------------------------
# graph evaluation


def _divided_derivative(a: Element, labels: tuple[int, ...]) -> Element:
    """prod_i (1/m_i!) d^{m_i}/dx_i^{m_i} over the label multiset."""
    out = a
    mult: dict[int, int] = {}
    for i in labels:
        mult[i] = mult.get(i, 0) + 1
    for i, m in sorted(mult.items()):
        for _ in range(m):
            out = poly_diff(out, i)
        out = out.scale(PolyScalar.rational(Fraction(1, factorial(m))))
    return out


def _graph_operator(graph: KGraph, cochain: DeformationCochain,
                    budget: int = DEFAULT_BUDGET):
    """The bidifferential operator of a graph, as rows (coeff, df, dg).

    Sums over the insertion placements of the graph and over all index
    labelings (i_v < j_v at each vertex, labels weakly increasing along each
    incoming order), weighted by the replay multiplicity.  Each row applies
    divided derivatives with label multisets df and dg to the two factors and
    multiplies by the polynomial coefficient.
    """
    quiver = cochain.system.quiver
    d = len(quiver.arrow_names())
    order_map = dict(graph.orders)
    placements = [(tuple(graph.targets[v][0] if (mask >> v) & 1
                         else graph.targets[v][1] for v in range(graph.k)),
                   tuple(graph.targets[v][1] if (mask >> v) & 1
                         else graph.targets[v][0] for v in range(graph.k)))
                  for mask in range(2 ** graph.k)]
    rows: dict[tuple[tuple[int, ...], tuple[int, ...]], Element] = {}
    for pairs in itertools.product(
            itertools.combinations(range(1, d + 1), 2), repeat=graph.k):
        labels = {v: (j, i) for v, (i, j) in enumerate(pairs)}
        for out_j, out_i in placements:

            def edge_label(v: int, n: int) -> int:
                return labels[v][0] if out_j[v] == n else labels[v][1]

            ok = True
            incoming: dict[int, tuple[int, ...]] = {}
            for n, srcs in order_map.items():
                seq = tuple(edge_label(v, n) for v in srcs)
                if any(x > y for x, y in zip(seq, seq[1:])):
                    ok = False
                    break
                incoming[n] = seq
            if not ok:
                continue
            mult = _history_count(graph.k, out_j, out_i, graph.orders,
                                  tuple(labels[v] for v in range(graph.k)))
            if mult == 0:
                continue
            coeff = Element.unit(quiver).scale(PolyScalar.rational(mult))
            for v in range(graph.k):
                j, i = labels[v]
                value = cochain.value(quiver.path(f"x{j}", f"x{i}"))
                coeff = _poly_mul(coeff, _divided_derivative(value, incoming.get(v, ())),
                                  cochain.system, budget)
                if coeff.is_zero():
                    break
            if coeff.is_zero():
                continue
            key = (incoming.get(F_SLOT, ()), incoming.get(G_SLOT, ()))
            rows[key] = rows.get(key, Element.zero(quiver)) + coeff
    return [(c, df, dg) for (df, dg), c in rows.items() if not c.is_zero()]


def _apply_operator(rows, cochain: DeformationCochain, f: Element, g: Element,
                    trunc: int | None, budget: int) -> Element:
    total = Element.zero(cochain.system.quiver)
    for coeff, df, dg in rows:
        term = _poly_mul(coeff, _divided_derivative(f, df), cochain.system, budget)
        if term.is_zero():
            continue
        term = _poly_mul(term, _divided_derivative(g, dg), cochain.system, budget)
        total = total + term
    return total.truncated(trunc)


def eval_graph(graph: KGraph, cochain: DeformationCochain, f: Element,
               g: Element, trunc: int | None = None,
               budget: int = DEFAULT_BUDGET) -> Element:
    """The bidifferential operator of a graph applied to (f, g)."""
    if trunc is None:
        trunc = cochain.trunc
    cache = cochain.__dict__.setdefault("_graph_operators", {})
    key = (graph.k, graph.targets, graph.orders)
    if key not in cache:
        cache[key] = _graph_operator(graph, cochain, budget)
    return _apply_operator(cache[key], cochain, f, g, trunc, budget)


def graphical_star(f: Element, g: Element, cochain: DeformationCochain,
                   trunc: int | None = None, cap: int = 4,
                   budget: int = DEFAULT_BUDGET) -> Element:
    """f * g as the graph expansion: sum over k and all graphs of stratum k.

    The deformation part has strictly positive parameter degree, so strata
    beyond the truncation order cannot contribute.
    """
    if trunc is None:
        trunc = cochain.trunc
    if trunc is None:
        raise UsageError("graphical_star needs a finite truncation order")
    total = _poly_mul(f, g, cochain.system, budget)
    for k in range(1, trunc + 1):
        if k > cap:
            break
        for graph in enumerate_graphs(k, cap=cap):
            total = total + eval_graph(graph, cochain, f, g, trunc, budget)
    return total.truncated(trunc)


# ---------------------------------------------------------------------------
# Moyal product and gauge transformation for constant Poisson structures


def _constant_entries(eta: PoissonBivector) -> dict[tuple[int, int], PolyScalar]:
    if not eta.is_constant():
        raise UsageError("this operation needs a constant Poisson bivector")
    return {ji: next(iter(v.terms.values())) for ji, v in eta.entries.items()}


def moyal(f: Element, g: Element, eta: PoissonBivector, trunc: int = 4,
          budget: int = DEFAULT_BUDGET) -> Element:
    """The Moyal product exp((hbar/2) sum eta_ji (d_j x d_i - d_i x d_j))."""
    consts = _constant_entries(eta)
    R = eta.system
    hbar_half = PolyScalar.var(HBAR, is_param=True, trunc=trunc).scale(Fraction(1, 2))
    terms = [(PolyScalar.rational(1, trunc=trunc), f, g)]
    total = Element.zero(eta.quiver)
    for n in range(trunc + 1):
        for c, a, b in terms:
            total = total + _poly_mul(a, b, R, budget).scale(
                c.scale(Fraction(1, factorial(n))))
        nxt = []
        for c, a, b in terms:
            for (j, i), e in consts.items():
                coeff = c * hbar_half * e
                if coeff.is_zero():
                    continue
                nxt.append((coeff, poly_diff(a, j), poly_diff(b, i)))
                nxt.append((coeff.scale(-1), poly_diff(a, i), poly_diff(b, j)))
        terms = [(c, a, b) for c, a, b in nxt
                 if not (c.is_zero() or a.is_zero() or b.is_zero())]
        if not terms:
            break
    return total.truncated(trunc)


def gauge_phi(f: Element, eta: PoissonBivector, trunc: int = 4,
              budget: int = DEFAULT_BUDGET) -> Element:
    """Phi(f) = exp((hbar/2) sum eta_ji d^2/dx_i dx_j)(f)."""
    consts = _constant_entries(eta)
    hbar_half = PolyScalar.var(HBAR, is_param=True, trunc=trunc).scale(Fraction(1, 2))
    total = Element.zero(eta.quiver)
    current = [(PolyScalar.rational(1, trunc=trunc), f)]
    for n in range(trunc + 1):
        for c, a in current:
            total = total + a.scale(c.scale(Fraction(1, factorial(n))))
        nxt = []
        for c, a in current:
            for (j, i), e in consts.items():
                coeff = c * hbar_half * e
                da = poly_diff(poly_diff(a, i), j)
                if not (coeff.is_zero() or da.is_zero()):
                    nxt.append((coeff, da))
        current = nxt
        if not current:
            break
    return total.truncated(trunc)
