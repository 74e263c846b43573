"""Second Hochschild cohomology via first-order deformations.

A 2-cochain assigns to every rule left side s an irreducible parallel
element; a 1-cochain does the same for arrows.  Working modulo t^2, the
associativity defects on overlap words are linear in the 2-cochain, and the
gauge action T = id + psi*t linearizes to a map from 1-cochains to
2-cochains.  HH^2 is the kernel of the first map modulo the image of the
second, computed by exact rational elimination.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .quiver_core import Element, Path, PolyScalar, UsageError
from .reduction_engine import (
    DEFAULT_BUDGET,
    ReductionSystem,
    irreducible_paths,
    overlaps,
)
from .star_product import (
    DeformationCochain,
    GaugeOnArrows,
    _t_of_element,
    star,
)

__all__ = [
    "T_SYMBOL",
    "two_cochain_basis",
    "one_cochain_basis",
    "CocycleSpace",
    "CoboundarySpace",
    "Hh2Result",
    "cocycle_space",
    "coboundary_space",
    "hh2",
    "representative_cochain",
]

T_SYMBOL = "t"  # first-order deformation parameter


def _parallel_irreducibles(R: ReductionSystem, bound: int | None):
    """All irreducible paths, grouped by (source, target)."""
    irr = irreducible_paths(R.lhs_set(), R.quiver, max_len=bound)
    grouped: dict[tuple[str, str], list[Path]] = {}
    for u in sorted(irr, key=Path.sort_key):
        grouped.setdefault((u.source, u.target), []).append(u)
    return grouped


def two_cochain_basis(R: ReductionSystem, bound: int | None = None):
    """Ordered basis (s, u): rule left sides paired with parallel irreducibles."""
    grouped = _parallel_irreducibles(R, bound)
    basis: list[tuple[Path, Path]] = []
    for rule in R.rules:
        s = rule.lhs
        basis.extend((s, u) for u in grouped.get((s.source, s.target), []))
    return basis


def one_cochain_basis(R: ReductionSystem, bound: int | None = None):
    """Ordered basis (x, u): arrows paired with parallel irreducibles."""
    grouped = _parallel_irreducibles(R, bound)
    quiver = R.quiver
    basis: list[tuple[Path, Path]] = []
    for name in quiver.arrow_names():
        x = quiver.path(name)
        basis.extend((x, u) for u in grouped.get((x.source, x.target), []))
    return basis


# ---------------------------------------------------------------------------
# exact linear algebra over Q


def _rref(rows: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form with first-nonzero pivoting; returns pivots."""
    rows = [list(r) for r in rows]
    pivots: list[int] = []
    lead = 0
    ncols = len(rows[0]) if rows else 0
    for r in range(len(rows)):
        while lead < ncols:
            pivot = next((i for i in range(r, len(rows)) if rows[i][lead] != 0), None)
            if pivot is None:
                lead += 1
                continue
            rows[r], rows[pivot] = rows[pivot], rows[r]
            inv = Fraction(1) / rows[r][lead]
            rows[r] = [c * inv for c in rows[r]]
            for i in range(len(rows)):
                if i != r and rows[i][lead] != 0:
                    f = rows[i][lead]
                    rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
            pivots.append(lead)
            lead += 1
            break
        else:
            break
    rows = [r for r in rows if any(c != 0 for c in r)]
    return rows, pivots


def _kernel_basis(rows: list[list[Fraction]], ncols: int) -> list[tuple[Fraction, ...]]:
    """Basis of the null space of the matrix, one vector per free column."""
    rref, pivots = _rref(rows) if rows else ([], [])
    free = [j for j in range(ncols) if j not in pivots]
    basis = []
    for j in free:
        vec = [Fraction(0)] * ncols
        vec[j] = Fraction(1)
        for r, pj in enumerate(pivots):
            vec[pj] = -rref[r][j]
        basis.append(tuple(vec))
    return basis


def _row_space(rows: list[list[Fraction]]) -> list[tuple[Fraction, ...]]:
    rref, _ = _rref(rows) if rows else ([], [])
    return [tuple(r) for r in rref]


def _in_span(rows: list[tuple[Fraction, ...]], vec: tuple[Fraction, ...]) -> bool:
    before = len(_row_space([list(r) for r in rows]))
    after = len(_row_space([list(r) for r in rows] + [list(vec)]))
    return after == before


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CocycleSpace:
    basis: list[tuple[Path, Path]]
    matrix: list[tuple[Fraction, ...]]  # rows of the linearized defect map
    kernel: list[tuple[Fraction, ...]]


@dataclass(frozen=True)
class CoboundarySpace:
    basis: list[tuple[Path, Path]]       # 2-cochain coordinates
    domain: list[tuple[Path, Path]]      # 1-cochain basis
    columns: list[tuple[Fraction, ...]]  # image of each 1-cochain basis vector
    image: list[tuple[Fraction, ...]]    # row-reduced basis of the image


@dataclass(frozen=True)
class Hh2Result:
    dimension: int
    basis: list[tuple[Path, Path]]
    representatives: list[dict[Path, Element]]


def _basis_cochain(R: ReductionSystem, s: Path, u: Path) -> DeformationCochain:
    t = PolyScalar.var(T_SYMBOL, is_param=True, trunc=1)
    return DeformationCochain(R, {s: Element.from_path(u, t)}, trunc=1)


def _defect_coordinates(R: ReductionSystem, cochain: DeformationCochain,
                        budget: int):
    """Order-t parts of all S3 defects, as a map (overlap index, path) -> Q."""
    coords: dict[tuple[int, Path], Fraction] = {}
    for idx, amb in enumerate(overlaps(R.lhs_set())):
        u, v, w = (Element.from_path(f) for f in amb.factors)
        left = star(star(u, v, R, cochain, budget), w, R, cochain, budget)
        right = star(u, star(v, w, R, cochain, budget), R, cochain, budget)
        first_order = (left - right).coefficient_of(T_SYMBOL, 1)
        for p, c in first_order.terms.items():
            coords[(idx, p)] = c.as_rational()
    return coords


def cocycle_space(R: ReductionSystem, bound: int | None = None,
                  budget: int = DEFAULT_BUDGET) -> CocycleSpace:
    """Kernel of the linearized defect map on 2-cochains."""
    basis = two_cochain_basis(R, bound)
    columns = [_defect_coordinates(R, _basis_cochain(R, s, u), budget)
               for s, u in basis]
    row_keys = sorted({k for col in columns for k in col},
                      key=lambda k: (k[0], k[1].sort_key()))
    matrix = [tuple(col.get(k, Fraction(0)) for col in columns) for k in row_keys]
    kernel = _kernel_basis([list(r) for r in matrix], len(basis))
    return CocycleSpace(basis=basis, matrix=matrix, kernel=kernel)


def coboundary_space(R: ReductionSystem, bound: int | None = None,
                     budget: int = DEFAULT_BUDGET) -> CoboundarySpace:
    """Image of the linearized gauge action psi -> phitilde'.

    For T = id + psi*t and the undeformed star product the identity
    T(phi_s) + phitilde'(s)*t = T(s_1) * ... * T(s_m)  (mod t^2)
    determines phitilde' uniquely; its coordinates give one column per
    1-cochain basis vector.
    """
    basis2 = two_cochain_basis(R, bound)
    index = {pair: i for i, pair in enumerate(basis2)}
    basis1 = one_cochain_basis(R, bound)
    zero = DeformationCochain(R, {}, trunc=1)
    t = PolyScalar.var(T_SYMBOL, is_param=True, trunc=1)
    columns: list[tuple[Fraction, ...]] = []
    for x, u in basis1:
        psi = GaugeOnArrows(R, {x: Element.from_path(u, t)}, trunc=1)
        col = [Fraction(0)] * len(basis2)
        for rule in R.rules:
            s = rule.lhs
            prod = _t_of_element(Element.from_path(s), psi, R, zero, budget)
            induced = (prod - _t_of_element(rule.rhs, psi, R, zero, budget))
            induced = induced.coefficient_of(T_SYMBOL, 1)
            for p, c in induced.terms.items():
                if (s, p) not in index:
                    raise UsageError(
                        f"coboundary target {p!r} outside the capped basis; "
                        "raise the bound")
                col[index[(s, p)]] = c.as_rational()
        columns.append(tuple(col))
    image = _row_space([list(c) for c in columns])
    return CoboundarySpace(basis=basis2, domain=basis1, columns=columns,
                           image=image)


def hh2(R: ReductionSystem, bound: int | None = None,
        budget: int = DEFAULT_BUDGET) -> Hh2Result:
    """dim HH^2 = dim(cocycles) - dim(coboundaries), with representatives.

    Representatives are kernel basis vectors completing the coboundary space
    to the cocycle space, chosen greedily in canonical basis order.
    """
    cocycles = cocycle_space(R, bound, budget)
    coboundaries = coboundary_space(R, bound, budget)
    matrix = [list(r) for r in cocycles.matrix]
    for vec in coboundaries.image:
        residual = _matvec(matrix, vec)
        if any(c != 0 for c in residual):
            raise RuntimeError("coboundary is not a cocycle: d^2 != 0 at first order")
    dim = len(cocycles.kernel) - len(coboundaries.image)
    span = list(coboundaries.image)
    reps: list[tuple[Fraction, ...]] = []
    for vec in cocycles.kernel:
        if len(reps) == dim:
            break
        if not _in_span(span, vec):
            reps.append(vec)
            span.append(vec)
    representatives = []
    for vec in reps:
        values: dict[Path, Element] = {}
        for coeff, (s, u) in zip(vec, cocycles.basis):
            if coeff != 0:
                term = Element.from_path(u, PolyScalar.rational(coeff))
                values[s] = values.get(s, Element.zero(R.quiver)) + term
        representatives.append(values)
    return Hh2Result(dimension=dim, basis=cocycles.basis,
                     representatives=representatives)


def _matvec(rows: list[list[Fraction]], vec: tuple[Fraction, ...]):
    return [sum(a * b for a, b in zip(row, vec)) for row in rows]


def representative_cochain(R: ReductionSystem, values: dict[Path, Element],
                           param: str = T_SYMBOL) -> DeformationCochain:
    """Scale a rational representative by the first-order parameter."""
    t = PolyScalar.var(param, is_param=True, trunc=1)
    scaled = {s: v.scale(t) for s, v in values.items()}
    return DeformationCochain(R, scaled, trunc=1)
