"""Truncated Lie algebroid structures through their fiberwise-linear duals.

A rank-r algebroid jet over a ball around the origin of R^n is stored as
structure-function jets c^k_ij(x) and anchor-component jets B^l_i(x).  On the
dual coordinates (x^1..x^n, e_1..e_r) it induces the bivector

    {e_i, e_j} = sum_k c^k_ij(x) e_k,   {e_i, x^j} = B^j_i(x),   {x^i, x^j} = 0,

and one truncated Jacobi identity for that bivector encodes the algebroid
Jacobi identity and the bracket compatibility of the anchor at once.  Every
engine in this module therefore runs on the dual bivector; what makes the
runs algebroid-aware is the fiber-degree grading.  Giving each e-variable
weight one and each x-variable weight zero, admissible coordinate changes
keep base images free of e-variables and fiber images of weight exactly one,
and the Chevalley-Eilenberg complex of the dual isotropy splits along the
same weight.  Corrections are solved inside the weight-zero graded piece, so
emitted changes are always a base diffeomorphism jet plus a frame change.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .cohomology import (
    Cochain,
    ObstructionClass,
    _insert_index,
    coadjoint_rep,
    induced_polynomial_module,
)
from .liealg import (
    LeviSplit,
    LeviSplitError,
    LieAlgebra,
    SolverFailure,
    isotropy_from_linear_part,
    verify_levi_split,
)
from .linalg import LinearSolver
from .normalform import (
    ActionJet,
    IterationStep,
    IterationTrace,
    SplitNotCertified,
    _scheduler_blocks,
    _tail_stats,
    _twisted_field_module,
)
from .polyalg import (
    CoordChange,
    Jet,
    PoissonJet,
    compose_change,
    monomials,
    pushforward,
)

ZERO = Fraction(0)
ONE = Fraction(1)


def _fiber_degree(mono, base_dim: int) -> int:
    return sum(mono[base_dim:])


def _promote(jet: Jet, base_dim: int, rank: int, order: int) -> Jet:
    """Reinterpret a base-variable jet in the dual variables."""
    pad = (0,) * rank
    return Jet._raw(
        base_dim + rank, order, {mono + pad: c for mono, c in jet._c.items()}
    )


def _base_part(jet: Jet, base_dim: int, order: int) -> Jet:
    """Drop the fiber variables from a jet that does not use them."""
    coeffs = {}
    for mono, c in jet._c.items():
        if any(mono[base_dim:]):
            raise ValueError("jet depends on fiber variables")
        coeffs[mono[:base_dim]] = c
    return Jet._raw(base_dim, order, coeffs)


# ---------------------------------------------------------------------------
# algebroid jets and their duals


class AlgebroidJet:
    """Order-N jet of a Lie algebroid around a fixed point of the anchor.

    structure[i][j][k] is the base-variable jet multiplying e_k in the
    bracket of the frame sections e_i and e_j, truncated at N; anchor[i][l]
    is component l of the vector field the anchor assigns to e_i, truncated
    at N+1 and vanishing at the origin.  The dual bivector truncates at total
    degree N+1, and with fiber variables counting one degree the structure
    terms c(x)e fill it exactly while anchors reach one x-degree further;
    carrying that extra degree keeps the class closed under frame and base
    changes.  Construction certifies the data by validating the truncated
    Jacobi identity of the dual.
    """

    __slots__ = ("base_dim", "rank", "structure", "anchor", "order", "_dual")

    def __init__(self, base_dim: int, rank: int, structure, anchor, order: int):
        if base_dim < 0 or rank < 0 or order < 1:
            raise ValueError("need base_dim, rank >= 0 and order >= 1")
        structure = tuple(
            tuple(tuple(row) for row in block) for block in structure
        )
        anchor = tuple(tuple(row) for row in anchor)
        if len(structure) != rank or any(
            len(block) != rank or any(len(row) != rank for row in block)
            for block in structure
        ):
            raise ValueError("structure functions must form a rank^3 grid")
        if len(anchor) != rank or any(len(row) != base_dim for row in anchor):
            raise ValueError("anchor must give base_dim components per section")
        for block in structure:
            for row in block:
                for jet in row:
                    if not isinstance(jet, Jet) or jet.nvars != base_dim \
                            or jet.order != order:
                        raise ValueError(
                            "structure entries must be base-variable jets at the stated order"
                        )
        for row in anchor:
            for jet in row:
                if not isinstance(jet, Jet) or jet.nvars != base_dim \
                        or jet.order != order + 1:
                    raise ValueError(
                        "anchor entries must be base-variable jets one order deeper"
                    )
        for i in range(rank):
            for j in range(i, rank):
                for k in range(rank):
                    if not (structure[i][j][k] + structure[j][i][k]).is_zero():
                        raise ValueError(
                            f"structure functions ({i},{j}) are not antisymmetric"
                        )
        for i in range(rank):
            for l in range(base_dim):
                if anchor[i][l].constant_term:
                    raise ValueError("anchor must vanish at the origin")
        self.base_dim = base_dim
        self.rank = rank
        self.structure = structure
        self.anchor = anchor
        self.order = order
        self._dual = self._build_dual()

    def _build_dual(self) -> PoissonJet:
        n, r, order = self.base_dim, self.rank, self.order
        total = n + r
        dual_order = order + 1
        grid = [[Jet.zero(total, dual_order) for _ in range(total)] for _ in range(total)]
        for i in range(r):
            for j in range(i + 1, r):
                coeffs = {}
                for k in range(r):
                    unit = tuple(1 if t == k else 0 for t in range(r))
                    for mono, c in self.structure[i][j][k]._c.items():
                        coeffs[mono + unit] = coeffs.get(mono + unit, ZERO) + c
                jet = Jet(total, dual_order, coeffs)
                grid[n + i][n + j] = jet
                grid[n + j][n + i] = -jet
            for l in range(n):
                jet = _promote(self.anchor[i][l], n, r, dual_order)
                grid[n + i][l] = jet
                grid[l][n + i] = -jet
        # the constructor reruns antisymmetry and runs truncated Jacobi
        return PoissonJet(grid, dual_order)

    def fiber_algebra(self) -> LieAlgebra:
        """Lie algebra of the structure constants at the origin."""
        zero = (0,) * self.base_dim
        c = [
            [[self.structure[i][j][k].coefficient(zero) for k in range(self.rank)]
             for j in range(self.rank)]
            for i in range(self.rank)
        ]
        return LieAlgebra(c)

    def is_linear(self) -> bool:
        """Constant structure functions and linear anchors."""
        return all(
            jet.highest_degree() in (None, 0)
            for block in self.structure for row in block for jet in row
        ) and all(
            jet.highest_degree() in (None, 1)
            for row in self.anchor for jet in row
        )

    def linear_part(self) -> "LinearAlgebroid":
        if not self.is_linear():
            raise ValueError("jet carries nonlinear terms")
        zero = (0,) * self.base_dim
        unit = lambda k: tuple(1 if t == k else 0 for t in range(self.base_dim))
        mats = [
            [[self.anchor[i][l].coefficient(unit(k)) for k in range(self.base_dim)]
             for l in range(self.base_dim)]
            for i in range(self.rank)
        ]
        return LinearAlgebroid(self.fiber_algebra(), mats)

    def truncate(self, order: int) -> "AlgebroidJet":
        return AlgebroidJet(
            self.base_dim,
            self.rank,
            [[[jet.truncate(order) for jet in row] for row in block]
             for block in self.structure],
            [[jet.truncate(order + 1) for jet in row] for row in self.anchor],
            order,
        )

    def __eq__(self, other):
        if not isinstance(other, AlgebroidJet):
            return NotImplemented
        return (
            self.base_dim == other.base_dim
            and self.rank == other.rank
            and self.order == other.order
            and self.structure == other.structure
            and self.anchor == other.anchor
        )

    def __repr__(self):
        return (
            f"<AlgebroidJet rank {self.rank} over R^{self.base_dim} | "
            f"order {self.order}>"
        )


def algebroid_to_poisson(A: AlgebroidJet) -> PoissonJet:
    """Dual bivector on (x, e) variables, base variables first, truncated one
    degree above the algebroid order so the structure terms fit exactly."""
    return A._dual


def fiberwise_linearity_check(pi: PoissonJet, base_dim: int) -> bool:
    """Whether the bivector respects the declared base/fiber splitting.

    With the first base_dim variables basic and the rest fiber coordinates:
    fiber-fiber entries carry fiber-degree exactly one, fiber-base entries
    are free of fiber variables, and base-base entries vanish.
    """
    if not 0 <= base_dim <= pi.nvars:
        raise ValueError("base dimension out of range")
    n = pi.nvars
    for a in range(n):
        for b in range(a + 1, n):
            entry = pi.entries[a][b]
            if b < base_dim:
                if not entry.is_zero():
                    return False
            elif a < base_dim:
                if any(_fiber_degree(m, base_dim) for m in entry._c):
                    return False
            else:
                if any(_fiber_degree(m, base_dim) != 1 for m in entry._c):
                    return False
    return True


def poisson_to_algebroid(pi: PoissonJet, base_dim: int) -> AlgebroidJet:
    """Read structure functions and anchor components back off a fiberwise
    linear bivector; inverse of algebroid_to_poisson on its image."""
    if not fiberwise_linearity_check(pi, base_dim):
        raise ValueError("bivector is not fiberwise linear for this splitting")
    if pi.order < 1:
        raise ValueError("bivector order too small to carry an algebroid jet")
    n = base_dim
    rank = pi.nvars - n
    order = pi.order - 1
    structure = [
        [[Jet.zero(n, order) for _ in range(rank)] for _ in range(rank)]
        for _ in range(rank)
    ]
    anchor = [[Jet.zero(n, order + 1) for _ in range(n)] for _ in range(rank)]
    for i in range(rank):
        for j in range(i + 1, rank):
            blocks = [{} for _ in range(rank)]
            for mono, c in pi.entries[n + i][n + j]._c.items():
                k = next(t for t in range(rank) if mono[n + t])
                blocks[k][mono[:n]] = c
            for k in range(rank):
                jet = Jet(n, order, blocks[k])
                structure[i][j][k] = jet
                structure[j][i][k] = -jet
        for l in range(n):
            anchor[i][l] = _base_part(pi.entries[n + i][l], n, order + 1)
    return AlgebroidJet(n, rank, structure, anchor, order)


# ---------------------------------------------------------------------------
# changes of frame and base coordinates


def is_graded_change(change: CoordChange, base_dim: int) -> bool:
    """Whether a dual-variable change is a base diffeomorphism jet plus a
    frame change: base images free of fiber variables, fiber images of
    fiber-degree exactly one."""
    for a, comp in enumerate(change.components):
        want = 0 if a < base_dim else 1
        if any(_fiber_degree(m, base_dim) != want for m in comp._c):
            return False
    return True


@dataclass
class AlgebroidChange:
    """Base coordinate change plus an x-dependent frame change.

    base acts on the x-variables alone; frame[i][j] multiplies e_j in the
    image of e_i.  The pair is the same data as a grading-preserving change
    on the dual variables, and to_dual/from_dual convert losslessly.
    """

    base: CoordChange
    frame: tuple

    def __post_init__(self):
        self.frame = tuple(tuple(row) for row in self.frame)
        n = self.base.nvars
        order = self.base.order
        for row in self.frame:
            if len(row) != len(self.frame):
                raise ValueError("frame matrix must be square")
            for jet in row:
                if not isinstance(jet, Jet) or jet.nvars != n or jet.order != order:
                    raise ValueError("frame entries must be base-variable jets")

    @property
    def rank(self) -> int:
        return len(self.frame)

    @classmethod
    def identity(cls, base_dim: int, rank: int, order: int) -> "AlgebroidChange":
        frame = [
            [Jet.one(base_dim, order) if i == j else Jet.zero(base_dim, order)
             for j in range(rank)]
            for i in range(rank)
        ]
        return cls(CoordChange.identity(base_dim, order), frame)

    def to_dual(self) -> CoordChange:
        n = self.base.nvars
        r = self.rank
        order = self.base.order
        comps = [_promote(c, n, r, order) for c in self.base.components]
        for i in range(r):
            coeffs = {}
            for j in range(r):
                unit = tuple(1 if t == j else 0 for t in range(r))
                for mono, c in self.frame[i][j]._c.items():
                    if sum(mono) + 1 <= order:
                        key = mono + unit
                        coeffs[key] = coeffs.get(key, ZERO) + c
            comps.append(Jet(n + r, order, coeffs))
        return CoordChange(comps)

    @classmethod
    def from_dual(cls, change: CoordChange, base_dim: int) -> "AlgebroidChange":
        if not is_graded_change(change, base_dim):
            raise ValueError("change does not preserve the base/fiber grading")
        n = base_dim
        r = change.nvars - n
        order = change.order
        base = CoordChange(
            [_base_part(c, n, order) for c in change.components[:n]]
        )
        frame = []
        for i in range(r):
            row = [{} for _ in range(r)]
            for mono, c in change.components[n + i]._c.items():
                j = next(t for t in range(r) if mono[n + t])
                row[j][mono[:n]] = c
            frame.append([Jet(n, order, blk) for blk in row])
        return cls(base, frame)

    def __eq__(self, other):
        if not isinstance(other, AlgebroidChange):
            return NotImplemented
        return self.base == other.base and self.frame == other.frame


def apply_algebroid_change(A: AlgebroidJet, change: AlgebroidChange) -> AlgebroidJet:
    """Transport an algebroid jet along a base change and frame change."""
    dual = algebroid_to_poisson(A)
    moved = pushforward(dual, change.to_dual().truncate(dual.order))
    return poisson_to_algebroid(moved, A.base_dim)


# ---------------------------------------------------------------------------
# constant-coefficient models


@dataclass
class LinearAlgebroid:
    """Fiber Lie algebra acting linearly on the base: the normal form every
    linearization targets.  action[i] is the anchor matrix of section e_i;
    the matrices must close under the commutator the way the anchors of a
    bracket-compatible frame do, which is checked on construction."""

    algebra: LieAlgebra
    action: tuple

    def __post_init__(self):
        self.action = tuple(
            tuple(tuple(Fraction(x) for x in row) for row in mat)
            for mat in self.action
        )
        if len(self.action) != self.algebra.dim:
            raise ValueError("need one anchor matrix per section")
        base_dim = len(self.action[0]) if self.action else 0
        for mat in self.action:
            if len(mat) != base_dim or any(len(row) != base_dim for row in mat):
                raise ValueError("anchor matrices must be square and equal-sized")
        if base_dim:
            # anchor compatibility is exactly the field-morphism property
            ActionJet.linear(self.algebra, self.action, 2)

    @property
    def rank(self) -> int:
        return self.algebra.dim

    @property
    def base_dim(self) -> int:
        return len(self.action[0]) if self.action else 0

    def to_algebroid(self, order: int) -> AlgebroidJet:
        return action_algebroid(self.algebra, self.action, self.base_dim, order)


def action_algebroid(algebra: LieAlgebra, matrices, base_dim: int,
                     order: int) -> AlgebroidJet:
    """Algebroid with constant structure functions and linear anchors."""
    rank = algebra.dim
    structure = [
        [[Jet(base_dim, order, {(0,) * base_dim: algebra.constants[i][j][k]})
          for k in range(rank)]
         for j in range(rank)]
        for i in range(rank)
    ]
    unit = lambda k: tuple(1 if t == k else 0 for t in range(base_dim))
    anchor = [
        [Jet(base_dim, order + 1,
             {unit(k): matrices[i][l][k] for k in range(base_dim)})
         for l in range(base_dim)]
        for i in range(rank)
    ]
    return AlgebroidJet(base_dim, rank, structure, anchor, order)


# ---------------------------------------------------------------------------
# graded cochain complex of the dual isotropy

_GRADED_CACHE: dict = {}


class _DualGradedComplex:
    """Chevalley-Eilenberg cochains of the dual isotropy algebra with values
    in degree-d polynomials, restricted to the fiber-degree grading.

    A subset S of generators gets the monomials of fiber-degree
    (#fiber generators in S) - (|S| - 1); base generators act with weight -1
    and fiber generators with weight 0, so the differential respects the
    slot-dependent bases and the restriction is a subcomplex.
    """

    def __init__(self, constants, base_dim: int, degree: int):
        self.constants = constants
        self.base_dim = base_dim
        self.degree = degree
        self.ngens = len(constants)
        self._by_edeg: dict = {}
        self._layout: dict = {}
        self._mats: dict = {}
        self._solvers: dict = {}

    def slot_basis(self, subset) -> tuple:
        edeg = sum(1 for a in subset if a >= self.base_dim) - (len(subset) - 1)
        cached = self._by_edeg.get(edeg)
        if cached is None:
            if edeg < 0 or edeg > self.degree:
                cached = ([], {})
            else:
                basis = [
                    m for m in monomials(self.ngens, self.degree)
                    if _fiber_degree(m, self.base_dim) == edeg
                ]
                cached = (basis, {m: i for i, m in enumerate(basis)})
            self._by_edeg[edeg] = cached
        return cached

    def layout(self, r: int):
        """(subsets, offsets, total dimension) of graded C^r."""
        cached = self._layout.get(r)
        if cached is None:
            subsets = list(combinations(range(self.ngens), r))
            offsets = {}
            total = 0
            for s in subsets:
                offsets[s] = total
                total += len(self.slot_basis(s)[0])
            cached = (subsets, offsets, total)
            self._layout[r] = cached
        return cached

    def cochain_dim(self, r: int) -> int:
        return self.layout(r)[2]

    def differential_matrix(self, r: int):
        cached = self._mats.get(r)
        if cached is not None:
            return cached
        constants = self.constants
        src_subsets, src_offsets, ncols = self.layout(r)
        tgt_subsets, tgt_offsets, nrows = self.layout(r + 1)
        mat = [[ZERO] * ncols for _ in range(nrows)]
        for t_set in tgt_subsets:
            row_base = tgt_offsets[t_set]
            _, t_index = self.slot_basis(t_set)
            for a, ta in enumerate(t_set):
                rest = t_set[:a] + t_set[a + 1:]
                src_basis, _ = self.slot_basis(rest)
                col_base = src_offsets[rest]
                sign = -ONE if a % 2 else ONE
                crow = constants[ta]
                for col, mono in enumerate(src_basis):
                    for u, exp in enumerate(mono):
                        if not exp:
                            continue
                        for l in range(self.ngens):
                            c = crow[u][l]
                            if not c:
                                continue
                            target = list(mono)
                            target[u] -= 1
                            target[l] += 1
                            row = t_index[tuple(target)]
                            mat[row_base + row][col_base + col] += sign * exp * c
            for a in range(len(t_set)):
                for b in range(a + 1, len(t_set)):
                    rest = tuple(
                        x for p, x in enumerate(t_set) if p not in (a, b)
                    )
                    pair_sign = -ONE if (a + b) % 2 else ONE
                    for k in range(self.ngens):
                        c = constants[t_set[a]][t_set[b]][k]
                        if not c:
                            continue
                        ins_sign, subset = _insert_index(k, rest)
                        if ins_sign == 0:
                            continue
                        col_base = src_offsets[subset]
                        src_basis, src_index = self.slot_basis(subset)
                        factor = pair_sign * ins_sign * c
                        for col, mono in enumerate(src_basis):
                            mat[row_base + t_index[mono]][col_base + col] += factor
        self._mats[r] = mat
        return mat

    def coboundary_solver(self, r: int) -> LinearSolver:
        cached = self._solvers.get(r)
        if cached is None:
            cached = LinearSolver(
                self.differential_matrix(r - 1), self.cochain_dim(r - 1)
            )
            self._solvers[r] = cached
        return cached

    def h_dim(self, r: int) -> int:
        kernel = self.cochain_dim(r)
        if self.cochain_dim(r + 1):
            kernel -= LinearSolver(
                self.differential_matrix(r), self.cochain_dim(r)
            ).rank
        image = self.coboundary_solver(r).rank if r >= 1 else 0
        return kernel - image


def _graded_complex(constants, base_dim: int, degree: int) -> _DualGradedComplex:
    key = (constants, base_dim, degree)
    hit = _GRADED_CACHE.get(key)
    if hit is None:
        hit = _DualGradedComplex(constants, base_dim, degree)
        _GRADED_CACHE[key] = hit
    return hit


# ---------------------------------------------------------------------------
# linearization


def _dual_tail(pi: PoissonJet):
    n = pi.nvars
    return [
        pi.entries[a][b] - pi.entries[a][b].homogeneous_part(1)
        for a in range(n) for b in range(a + 1, n)
    ]


def _graded_remainder_vector(pi: PoissonJet, cx: _DualGradedComplex, degree: int):
    subsets, offsets, total = cx.layout(2)
    vec = [ZERO] * total
    nonzero = False
    for pair in subsets:
        a, b = pair
        part = pi.entries[a][b].homogeneous_part(degree)
        if part.is_zero():
            continue
        _, index = cx.slot_basis(pair)
        base = offsets[pair]
        for mono, c in part._c.items():
            pos = index.get(mono)
            if pos is None:
                raise SolverFailure("remainder leaves the graded span")
            vec[base + pos] = c
            nonzero = True
    return vec if nonzero else None


def _graded_correction(solution, cx: _DualGradedComplex, order: int) -> CoordChange:
    comps = []
    _, offsets, _ = cx.layout(1)
    for a in range(cx.ngens):
        basis, _ = cx.slot_basis((a,))
        base = offsets[(a,)]
        coeffs = {
            mono: solution[base + pos]
            for pos, mono in enumerate(basis) if solution[base + pos]
        }
        comps.append(Jet.variable(a, cx.ngens, order) - Jet(cx.ngens, order, coeffs))
    return CoordChange(comps)


def _embed_obstruction(iso: LieAlgebra, cx: _DualGradedComplex, degree: int,
                       vec, lam) -> ObstructionClass:
    """Lift a graded certificate into the full cochain complex.

    The graded pieces of the full complex are preserved by the differential,
    so a functional supported on one graded piece that annihilates the graded
    coboundaries annihilates all full coboundaries as well.
    """
    module = induced_polynomial_module(iso, iso.dim, coadjoint_rep(iso), degree)
    mono_index = {m: i for i, m in enumerate(module.labels)}
    subsets, offsets, _ = cx.layout(2)
    full_vec = [ZERO] * module.cochain_dim(2)
    full_lam = [ZERO] * module.cochain_dim(2)
    for s_pos, pair in enumerate(subsets):
        basis, _ = cx.slot_basis(pair)
        base = offsets[pair]
        for pos, mono in enumerate(basis):
            full = s_pos * module.dim + mono_index[mono]
            full_vec[full] = vec[base + pos]
            full_lam[full] = lam[base + pos]
    return ObstructionClass(
        Cochain(module, 2, full_vec), full_lam, cx.h_dim(2)
    )


def linearize_algebroid(A: AlgebroidJet, scheduler: str = "doubling",
                        order: int | None = None, radius=ONE):
    """Normalize an algebroid jet to constant structure functions and linear
    anchors.

    Runs on the dual bivector with corrections restricted to the fiber-degree
    grading, so every emitted change is a base change plus a frame change.
    Returns (AlgebroidChange, LinearAlgebroid, IterationTrace) on success, or
    (ObstructionClass, IterationTrace) when a graded degree-d class survives;
    the certificate is embedded in the full cochain complex of the dual
    isotropy and its h_dim counts the grading-compatible classes.
    """
    if order is None:
        order = A.order
    if order > A.order:
        raise ValueError("target order exceeds the jet's truncation")
    if order < A.order:
        A = A.truncate(order)
    current = algebroid_to_poisson(A)
    dual_order = current.order
    base_dim = A.base_dim
    iso = isotropy_from_linear_part(current)
    accumulated = CoordChange.identity(current.nvars, dual_order)
    trace = IterationTrace(scheduler, Fraction(radius), dual_order)
    for block_index, degrees in _scheduler_blocks(scheduler, dual_order):
        lowest_before, norm_before = _tail_stats(_dual_tail(current), radius)
        if lowest_before is None or lowest_before > degrees[-1]:
            continue
        treated = []
        for degree in degrees:
            cx = _graded_complex(iso.constants, base_dim, degree)
            vec = _graded_remainder_vector(current, cx, degree)
            if vec is None:
                continue
            treated.append(degree)
            solver = cx.coboundary_solver(2)
            solution = solver.solve(vec)
            if solution is None:
                partial, _residual = solver.solve_partial(vec)
                if any(partial):
                    change = _graded_correction(partial, cx, dual_order)
                    current = pushforward(current, change)
                    accumulated = compose_change(accumulated, change)
                lam = solver.null_functional(vec)
                obstruction = _embed_obstruction(iso, cx, degree, vec, lam)
                lowest_after, norm_after = _tail_stats(_dual_tail(current), radius)
                trace.steps.append(IterationStep(
                    block_index, tuple(treated), lowest_before, lowest_after,
                    norm_before, norm_after, obstructed=True,
                ))
                return obstruction, trace
            change = _graded_correction(solution, cx, dual_order)
            current = pushforward(current, change)
            accumulated = compose_change(accumulated, change)
        if treated:
            lowest_after, norm_after = _tail_stats(_dual_tail(current), radius)
            trace.steps.append(IterationStep(
                block_index, tuple(treated), lowest_before, lowest_after,
                norm_before, norm_after,
            ))
    if not current.is_linear():
        raise SolverFailure("dual bivector not linear after all degrees were cleared")
    constants = current.linear_constants()
    n, r = base_dim, A.rank
    fiber = LieAlgebra([
        [[constants[n + i][n + j][n + k] for k in range(r)] for j in range(r)]
        for i in range(r)
    ])
    mats = [
        [[constants[n + i][l][k] for k in range(n)] for l in range(n)]
        for i in range(r)
    ]
    # from_dual rejects any change that broke the grading
    return (
        AlgebroidChange.from_dual(accumulated, base_dim),
        LinearAlgebroid(fiber, mats),
        trace,
    )


# ---------------------------------------------------------------------------
# Levi normalization of the fiber algebra


def levi_algebroid(A: AlgebroidJet, split: LeviSplit, order: int | None = None,
                   radius=ONE):
    """Normalize the semisimple part of an algebroid jet.

    split must certify a Levi decomposition of the fiber algebra at the
    origin.  In the adapted frame (s-sections first) the returned jet has
    constant s-s and s-r structure functions and exactly linear anchors on
    the s-sections through the truncation; the rest of the data rides along
    untouched.  Returns (AlgebroidChange, AlgebroidJet, IterationTrace).
    """
    fiber = A.fiber_algebra()
    if split.algebra != fiber:
        raise SplitNotCertified(
            "split belongs to a different algebra than the fiber isotropy"
        )
    try:
        verify_levi_split(fiber, split.s_basis, split.r_basis)
    except LeviSplitError as exc:
        raise SplitNotCertified(f"{exc.violation}: {exc}") from exc
    if order is None:
        order = A.order
    if order > A.order:
        raise ValueError("target order exceeds the jet's truncation")
    if order < A.order:
        A = A.truncate(order)
    n = A.base_dim
    total = n + A.rank
    ns = len(split.s_basis)
    nr = len(split.r_basis)
    dual_order = order + 1
    trace = IterationTrace("levi", Fraction(radius), dual_order)

    rows = [[ONE if t == a else ZERO for t in range(total)] for a in range(n)]
    rows += [[ZERO] * n + list(v) for v in split.s_basis + split.r_basis]
    adapt = CoordChange.linear(rows, dual_order)
    current = pushforward(algebroid_to_poisson(A), adapt)
    accumulated = adapt

    if ns == 0:
        return (
            AlgebroidChange.from_dual(adapt, n),
            poisson_to_algebroid(current, n),
            trace,
        )

    c_full = isotropy_from_linear_part(current).constants
    s_constants = [
        [[c_full[n + a][n + b][n + k] for k in range(ns)] for b in range(ns)]
        for a in range(ns)
    ]
    s_algebra = LieAlgebra(s_constants)
    s_rep = tuple(
        tuple(tuple(c_full[n + a][j][k] for j in range(total)) for k in range(total))
        for a in range(ns)
    )
    frame_twists = tuple(
        tuple(tuple(c_full[n + a][n + ns + beta][n + ns + gamma]
                    for gamma in range(nr)) for beta in range(nr))
        for a in range(ns)
    )
    base_twists = tuple(
        tuple(tuple(c_full[n + a][j][k] for k in range(n)) for j in range(n))
        for a in range(ns)
    )

    def normalized_tail():
        jets = [
            current.entries[n + a][n + b] - current.entries[n + a][n + b].homogeneous_part(1)
            for a in range(ns) for b in range(a + 1, ns)
        ]
        jets.extend(
            current.entries[n + a][n + ns + beta]
            - current.entries[n + a][n + ns + beta].homogeneous_part(1)
            for a in range(ns) for beta in range(nr)
        )
        jets.extend(
            current.entries[n + a][j] - current.entries[n + a][j].homogeneous_part(1)
            for a in range(ns) for j in range(n)
        )
        return jets

    def fiber_filter(m):
        return _fiber_degree(m, n) == 1

    def base_filter(m):
        return _fiber_degree(m, n) == 0

    def apply_change(comps):
        nonlocal current, accumulated
        change = CoordChange(comps)
        current = pushforward(current, change)
        accumulated = compose_change(accumulated, change)

    def coordinate_jets():
        return [Jet.variable(t, total, dual_order) for t in range(total)]

    for degree in range(2, dual_order + 1):
        lowest_before, norm_before = _tail_stats(normalized_tail(), radius)
        if lowest_before is None or lowest_before > degree:
            continue
        did_work = False
        v1 = induced_polynomial_module(
            s_algebra, total, s_rep, degree,
            monomial_filter=fiber_filter, filter_key=("fiber-degree", 1, n),
        )
        v0 = induced_polynomial_module(
            s_algebra, total, s_rep, degree,
            monomial_filter=base_filter, filter_key=("fiber-degree", 0, n),
        )

        components = {}
        for a in range(ns):
            for b in range(a + 1, ns):
                part = current.entries[n + a][n + b].homogeneous_part(degree)
                if not part.is_zero():
                    components[(a, b)] = _filtered_vector(part, v1)
        if components:
            did_work = True
            target = Cochain.from_components(v1, 2, components)
            solution = v1.coboundary_solver(2).solve(target.vector)
            if solution is None:
                raise SolverFailure("2-cochain solve failed on a semisimple factor")
            comps = coordinate_jets()
            for a in range(ns):
                block = solution[a * v1.dim:(a + 1) * v1.dim]
                comps[n + a] = comps[n + a] - _jet_from_basis(block, v1, total, dual_order)
            apply_change(comps)

        if nr:
            key = ("algebroid-sr", s_algebra.constants, s_rep, total, degree,
                   frame_twists, 1, n)
            u1 = _twisted_field_module(s_algebra, v1, frame_twists, key)
            components = {}
            for a in range(ns):
                vec = [ZERO] * u1.dim
                nonzero = False
                for beta in range(nr):
                    part = current.entries[n + a][n + ns + beta].homogeneous_part(degree)
                    if part.is_zero():
                        continue
                    nonzero = True
                    block = _filtered_vector(part, v1)
                    for l, x in enumerate(block):
                        vec[beta * v1.dim + l] = x
                if nonzero:
                    components[(a,)] = vec
            if components:
                did_work = True
                target = Cochain.from_components(u1, 1, components)
                solution = u1.coboundary_solver(1).solve(target.vector)
                if solution is None:
                    raise SolverFailure("1-cochain solve failed on a semisimple factor")
                comps = coordinate_jets()
                for beta in range(nr):
                    block = solution[beta * v1.dim:(beta + 1) * v1.dim]
                    comps[n + ns + beta] = comps[n + ns + beta] - _jet_from_basis(
                        block, v1, total, dual_order
                    )
                apply_change(comps)

        key = ("algebroid-anchor", s_algebra.constants, s_rep, total, degree,
               base_twists, 0, n)
        u0 = _twisted_field_module(s_algebra, v0, base_twists, key)
        components = {}
        for a in range(ns):
            vec = [ZERO] * u0.dim
            nonzero = False
            for j in range(n):
                part = current.entries[n + a][j].homogeneous_part(degree)
                if part.is_zero():
                    continue
                nonzero = True
                block = _filtered_vector(part, v0)
                for l, x in enumerate(block):
                    vec[j * v0.dim + l] = x
            if nonzero:
                components[(a,)] = vec
        if components:
            did_work = True
            target = Cochain.from_components(u0, 1, components)
            solution = u0.coboundary_solver(1).solve(target.vector)
            if solution is None:
                raise SolverFailure("1-cochain solve failed on a semisimple factor")
            comps = coordinate_jets()
            for j in range(n):
                block = solution[j * v0.dim:(j + 1) * v0.dim]
                comps[j] = comps[j] - _jet_from_basis(block, v0, total, dual_order)
            apply_change(comps)

        if did_work:
            lowest_after, norm_after = _tail_stats(normalized_tail(), radius)
            trace.steps.append(IterationStep(
                degree, (degree,), lowest_before, lowest_after,
                norm_before, norm_after,
            ))

    leftover, _ = _tail_stats(normalized_tail(), radius)
    if leftover is not None:
        raise SolverFailure("normalized blocks not exactly linear after the loop")
    return (
        AlgebroidChange.from_dual(accumulated, n),
        poisson_to_algebroid(current, n),
        trace,
    )


def _filtered_vector(jet: Jet, module):
    """Coefficients of a homogeneous jet on a filtered monomial basis."""
    index = {m: i for i, m in enumerate(module.labels)}
    vec = [ZERO] * module.dim
    for mono, c in jet._c.items():
        pos = index.get(mono)
        if pos is None:
            raise SolverFailure("remainder leaves the module's monomial span")
        vec[pos] = c
    return vec


def _jet_from_basis(block, module, nvars: int, order: int) -> Jet:
    coeffs = {
        mono: c for mono, c in zip(module.labels, block) if c
    }
    return Jet(nvars, order, coeffs)
