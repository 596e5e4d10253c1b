"""Normalization engines.

One homogeneous step is shared by every engine: extract the degree-d
remainder as a cochain, solve d(sigma) = R exactly, and apply the coordinate
change x -> x - sigma.  The two schedulers differ only in how steps are
grouped: `degree` treats one homogeneous degree per step, `doubling` treats
the block [2^nu, 2^(nu+1)) per step, clearing its degrees lowest-first so the
quadratic interaction of corrections (which can reach degree 2^(nu+1)-1)
never re-enters a cleared block.  All decisions are exact; the Hermitian
norms carried on traces are binary64 diagnostics only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .cohomology import (
    Cochain,
    GModule,
    ObstructionClass,
    coadjoint_rep,
    cohomology_dimension,
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
from .polyalg import (
    CoordChange,
    Jet,
    PoissonJet,
    compose_change,
    homogeneous_to_vector,
    invert_change,
    monomials,
    pushforward,
    vector_to_homogeneous,
)

ZERO = Fraction(0)
ONE = Fraction(1)


class PreconditionNotNormalized(ValueError):
    """A degree-d remainder was requested while lower degrees still carry
    nonlinear terms."""


class SplitNotCertified(ValueError):
    """The Levi split handed to levi_decompose does not certify against the
    bivector's isotropy algebra."""


# ---------------------------------------------------------------------------
# Hermitian metric diagnostics


def hermitian_weights(nvars: int, degree: int, radius=ONE) -> list[Fraction]:
    """Squared norm of each graded-lex monomial of the given degree:
    alpha! n! / (|alpha|+n)! * r^(2|alpha|)."""
    radius = Fraction(radius)
    if radius <= 0:
        raise ValueError("radius must be positive")
    scale = Fraction(math.factorial(nvars), math.factorial(degree + nvars))
    rpow = radius ** (2 * degree)
    out = []
    for mono in monomials(nvars, degree):
        fact = 1
        for e in mono:
            fact *= math.factorial(e)
        out.append(fact * scale * rpow)
    return out


def hermitian_inner(f: Jet, g: Jet, radius=ONE) -> Fraction:
    """Exact inner product in which distinct monomials are orthogonal and
    x^alpha has squared length alpha! n!/(|alpha|+n)! r^(2|alpha|)."""
    radius = Fraction(radius)
    if radius <= 0:
        raise ValueError("radius must be positive")
    if f.nvars != g.nvars:
        raise ValueError("jets live on different variable sets")
    nfact = math.factorial(f.nvars)
    total = ZERO
    for mono, a in f.terms():
        b = g.coefficient(mono)
        if not b:
            continue
        d = sum(mono)
        fact = 1
        for e in mono:
            fact *= math.factorial(e)
        total += a * b * Fraction(fact * nfact, math.factorial(d + f.nvars)) * radius ** (2 * d)
    return total


def hermitian_norm(f: Jet, radius=ONE) -> float:
    return math.sqrt(float(hermitian_inner(f, f, radius)))


# ---------------------------------------------------------------------------
# iteration traces


@dataclass
class IterationStep:
    block_index: int
    degrees: tuple[int, ...]
    lowest_before: int | None
    lowest_after: int | None
    norm_before: float
    norm_after: float
    obstructed: bool = False


@dataclass
class IterationTrace:
    scheduler: str
    radius: Fraction
    target_order: int
    steps: list[IterationStep] = field(default_factory=list)


def _scheduler_blocks(scheduler: str, order: int) -> list[tuple[int, list[int]]]:
    if scheduler == "degree":
        return [(d, [d]) for d in range(2, order + 1)]
    if scheduler == "doubling":
        blocks = []
        nu = 1
        while 2**nu <= order:
            blocks.append((nu, list(range(2**nu, min(2 ** (nu + 1), order + 1)))))
            nu += 1
        return blocks
    raise ValueError(f"unknown scheduler {scheduler!r}; use 'degree' or 'doubling'")


def convergence_report(trace: IterationTrace) -> dict:
    """Per-step diagnostics: degrees treated, lowest remaining degree, norms,
    and the quadratic contraction ratio |R_next| / |R|^2.  On doubling traces
    the block law (lowest degree entering block nu is at least 2^nu) is
    enforced and its violation raises RuntimeError."""
    steps = []
    prev_norm = None
    for step in trace.steps:
        if trace.scheduler == "doubling" and step.lowest_before is not None:
            if step.lowest_before < 2**step.block_index:
                raise RuntimeError(
                    f"doubling law violated: block {step.block_index} saw lowest "
                    f"degree {step.lowest_before}"
                )
        ratio = None
        if prev_norm not in (None, 0.0):
            ratio = step.norm_before / prev_norm**2
        steps.append({
            "block": step.block_index,
            "degrees": list(step.degrees),
            "lowest_before": step.lowest_before,
            "lowest_after": step.lowest_after,
            "norm_before": step.norm_before,
            "norm_after": step.norm_after,
            "quadratic_ratio": ratio,
            "obstructed": step.obstructed,
        })
        prev_norm = step.norm_before
    return {
        "scheduler": trace.scheduler,
        "radius": float(trace.radius),
        "target_order": trace.target_order,
        "steps": steps,
    }


def _tail_stats(jets, radius) -> tuple[int | None, float]:
    lowest = None
    norm = 0.0
    for jet in jets:
        low = jet.lowest_degree()
        if low is not None and (lowest is None or low < lowest):
            lowest = low
        norm = max(norm, hermitian_norm(jet, radius))
    return lowest, norm


# ---------------------------------------------------------------------------
# Poisson linearization


def _module_vector(jet: Jet, module: GModule):
    index = {mono: i for i, mono in enumerate(module.labels)}
    vec = [ZERO] * module.dim
    for mono, c in jet.terms():
        pos = index.get(mono)
        if pos is None:
            raise SolverFailure("remainder leaves the module's monomial span")
        vec[pos] = c
    return vec


def poisson_remainder(pi: PoissonJet, degree: int) -> Cochain:
    """Degree-d part of the bracket minus its linear part, as a 2-cochain on
    the isotropy algebra with degree-d polynomial coefficients."""
    if degree < 2:
        raise ValueError("remainders start at degree 2")
    L = isotropy_from_linear_part(pi)
    n = pi.nvars
    for i in range(n):
        for j in range(i + 1, n):
            entry = pi.entries[i][j]
            for low in range(2, degree):
                if not entry.homogeneous_part(low).is_zero():
                    raise PreconditionNotNormalized(
                        f"bracket entry ({i},{j}) still has degree-{low} terms"
                    )
    module = induced_polynomial_module(L, n, coadjoint_rep(L), degree)
    components = {}
    for i in range(n):
        for j in range(i + 1, n):
            part = pi.entries[i][j].homogeneous_part(degree)
            if not part.is_zero():
                components[(i, j)] = _module_vector(part, module)
    return Cochain.from_components(module, 2, components)


class _PoissonProblem:
    """Adapter running the shared scheduler loop on a bivector."""

    cochain_degree = 2

    def __init__(self, pi: PoissonJet):
        self.state = pi
        self.algebra = isotropy_from_linear_part(pi)
        self.nvars = pi.nvars
        self.order = pi.order
        self.accumulated = CoordChange.identity(pi.nvars, pi.order)
        self._rep = coadjoint_rep(self.algebra)

    def module(self, degree: int) -> GModule:
        return induced_polynomial_module(self.algebra, self.nvars, self._rep, degree)

    def remainder_vector(self, module: GModule, degree: int):
        return poisson_remainder(self.state, degree).vector

    def correction_change(self, module: GModule, solution, degree: int) -> CoordChange:
        n = self.nvars
        comps = []
        for i in range(n):
            block = solution[i * module.dim:(i + 1) * module.dim]
            f = vector_to_homogeneous(n, self.order, degree, block)
            comps.append(Jet.variable(i, n, self.order) - f)
        return CoordChange(comps)

    def apply(self, change: CoordChange) -> None:
        self.accumulated = compose_change(self.accumulated, change)
        self.state = pushforward(self.state, change)

    def tail_jets(self):
        return [
            self.state.entries[i][j] - self.state.entries[i][j].homogeneous_part(1)
            for i in range(self.nvars) for j in range(i + 1, self.nvars)
        ]

    def finish(self):
        if not self.state.is_linear():
            raise SolverFailure("bracket not linear after all degrees were cleared")
        return self.state


def _run_scheduler(problem, scheduler: str, order: int, radius):
    trace = IterationTrace(scheduler, Fraction(radius), order)
    for block_index, degrees in _scheduler_blocks(scheduler, order):
        lowest_before, norm_before = _tail_stats(problem.tail_jets(), radius)
        if lowest_before is None or lowest_before > degrees[-1]:
            continue
        treated = []
        for degree in degrees:
            module = problem.module(degree)
            vec = problem.remainder_vector(module, degree)
            if not any(vec):
                continue
            treated.append(degree)
            solver = module.coboundary_solver(problem.cochain_degree)
            solution = solver.solve(vec)
            if solution is None:
                partial, _residual = solver.solve_partial(vec)
                if any(partial):
                    problem.apply(problem.correction_change(module, partial, degree))
                lam = solver.null_functional(vec)
                cocycle = Cochain(module, problem.cochain_degree, vec)
                obstruction = ObstructionClass(
                    cocycle, lam, cohomology_dimension(module, problem.cochain_degree)
                )
                lowest_after, norm_after = _tail_stats(problem.tail_jets(), radius)
                trace.steps.append(IterationStep(
                    block_index, tuple(treated), lowest_before, lowest_after,
                    norm_before, norm_after, obstructed=True,
                ))
                return obstruction, trace
            problem.apply(problem.correction_change(module, solution, degree))
        if treated:
            lowest_after, norm_after = _tail_stats(problem.tail_jets(), radius)
            trace.steps.append(IterationStep(
                block_index, tuple(treated), lowest_before, lowest_after,
                norm_before, norm_after,
            ))
    return None, trace


def linearize_poisson(pi: PoissonJet, scheduler: str = "doubling",
                      order: int | None = None, radius=ONE):
    """Linearize a truncated bivector.

    Returns (CoordChange, PoissonJet, IterationTrace) on success, where the
    bivector is exactly the linear structure of the isotropy constants, or
    (ObstructionClass, IterationTrace) when some degree carries a cohomology
    class no coordinate change can remove.  Partial removal still happens at
    the obstructed degree before the engine stops.
    """
    if order is None:
        order = pi.order
    if order > pi.order:
        raise ValueError("target order exceeds the bivector's truncation")
    problem = _PoissonProblem(pi.truncate(order) if order != pi.order else pi)
    obstruction, trace = _run_scheduler(problem, scheduler, order, radius)
    if obstruction is not None:
        return obstruction, trace
    return problem.accumulated, problem.finish(), trace


# ---------------------------------------------------------------------------
# Lie algebra actions


class ActionJet:
    """Polynomial action of a Lie algebra: one vector field per generator,
    vanishing at the origin, satisfying the morphism property
    fields([X,Y]) = [fields(X), fields(Y)] through the truncation order."""

    __slots__ = ("algebra", "fields", "nvars", "order")

    def __init__(self, algebra: LieAlgebra, fields, order: int | None = None):
        fields = tuple(tuple(comp for comp in fld) for fld in fields)
        if len(fields) != algebra.dim:
            raise ValueError("need one vector field per generator")
        if not fields or not fields[0]:
            raise ValueError("empty action")
        nvars = len(fields[0])
        if order is None:
            order = fields[0][0].order
        for fld in fields:
            if len(fld) != nvars:
                raise ValueError("vector fields must share the variable count")
            for comp in fld:
                if not isinstance(comp, Jet) or comp.nvars != nvars or comp.order != order:
                    raise ValueError("components must be jets in the same variables and order")
                if comp.constant_term:
                    raise ValueError("action fields must vanish at the origin")
        self.algebra = algebra
        self.fields = fields
        self.nvars = nvars
        self.order = order
        for i in range(algebra.dim):
            for j in range(i + 1, algebra.dim):
                commutator = _field_commutator(fields[i], fields[j], nvars, order)
                expected = [Jet.zero(nvars, order) for _ in range(nvars)]
                for k in range(algebra.dim):
                    c = algebra.constants[i][j][k]
                    if c:
                        for a in range(nvars):
                            expected[a] = expected[a] + fields[k][a] * c
                for a in range(nvars):
                    if commutator[a] != expected[a]:
                        raise ValueError(
                            f"fields {i} and {j} violate the morphism property"
                        )

    @classmethod
    def _trusted(cls, algebra, fields, nvars, order) -> "ActionJet":
        action = cls.__new__(cls)
        action.algebra = algebra
        action.fields = tuple(tuple(fld) for fld in fields)
        action.nvars = nvars
        action.order = order
        return action

    @classmethod
    def linear(cls, algebra: LieAlgebra, matrices, order: int) -> "ActionJet":
        """Action whose field for generator i has components (A_i x)^a."""
        nvars = len(matrices[0])
        fields = []
        for mat in matrices:
            comps = []
            for a in range(nvars):
                terms = {}
                for b in range(nvars):
                    c = Fraction(mat[a][b])
                    if c:
                        terms[tuple(1 if t == b else 0 for t in range(nvars))] = c
                comps.append(Jet(nvars, order, terms))
            fields.append(comps)
        return cls(algebra, fields, order)

    def linear_matrices(self):
        """A_i with field_i^a = (A_i x)^a + higher order."""
        n = self.nvars
        units = [tuple(1 if t == b else 0 for t in range(n)) for b in range(n)]
        return [
            [[fld[a].coefficient(units[b]) for b in range(n)] for a in range(n)]
            for fld in self.fields
        ]

    def is_linear(self) -> bool:
        return all(
            comp.highest_degree() in (None, 1) for fld in self.fields for comp in fld
        )

    def truncate(self, order: int) -> "ActionJet":
        fields = [[comp.truncate(order) for comp in fld] for fld in self.fields]
        return ActionJet._trusted(self.algebra, fields, self.nvars, order)

    def __eq__(self, other):
        if not isinstance(other, ActionJet):
            return NotImplemented
        return self.algebra == other.algebra and self.fields == other.fields

    def __repr__(self):
        return (f"<ActionJet {self.algebra.dim} generators on {self.nvars} "
                f"variables | order {self.order}>")


def _field_commutator(v, w, nvars: int, order: int):
    out = []
    for a in range(nvars):
        acc = Jet.zero(nvars, order)
        for b in range(nvars):
            if not v[b].is_zero():
                acc = acc + v[b] * w[a].diff(b)
            if not w[b].is_zero():
                acc = acc - w[b] * v[a].diff(b)
        out.append(acc)
    return out


def conjugate_action(action: ActionJet, change: CoordChange) -> ActionJet:
    """Transport every field through the coordinate change (Jacobian times
    field, composed with the inverse change)."""
    if change.nvars != action.nvars:
        raise ValueError("coordinate change has the wrong variable count")
    inverse = invert_change(change)
    nvars, order = action.nvars, action.order
    new_fields = []
    for fld in action.fields:
        comps = []
        for a in range(nvars):
            acc = Jet.zero(nvars, order)
            for b in range(nvars):
                if not fld[b].is_zero():
                    acc = acc + change.components[a].diff(b) * fld[b]
            comps.append(acc.substitute(inverse.components))
        new_fields.append(comps)
    return ActionJet._trusted(action.algebra, new_fields, nvars, order)


_TWISTED_MODULE_CACHE: dict = {}


def _twisted_field_module(algebra: LieAlgebra, base: GModule, twists, key) -> GModule:
    """Module of tuples over `base` twisted by matrices T_i:
    (X_i . u)^a = base action on u^a minus sum_b T_i[a][b] u^b.

    The rep property follows from T_j T_i - T_i T_j = sum_l c_ij^l T_l, which
    holds for linear parts of an action and for the r-block constants of a
    certified Levi split."""
    cached = _TWISTED_MODULE_CACHE.get(key)
    if cached is not None:
        return cached
    d = base.dim
    copies = len(twists[0]) if twists else 0
    mats = []
    for i in range(algebra.dim):
        size = copies * d
        mat = [[ZERO] * size for _ in range(size)]
        vmat = base.matrices[i]
        tw = twists[i]
        for a in range(copies):
            for l in range(d):
                row = mat[a * d + l]
                for u in range(d):
                    if vmat[l][u]:
                        row[a * d + u] += vmat[l][u]
            for b in range(copies):
                if tw[a][b]:
                    for l in range(d):
                        mat[a * d + l][b * d + l] -= tw[a][b]
        mats.append(mat)
    labels = [(a, mono) for a in range(copies) for mono in base.labels]
    module = GModule._trusted(algebra, mats, labels=labels)
    _TWISTED_MODULE_CACHE[key] = module
    return module


def _action_field_module(action: ActionJet, degree: int) -> GModule:
    mats = tuple(
        tuple(tuple(row) for row in m) for m in action.linear_matrices()
    )
    n = action.nvars
    operator = [
        [[mats[i][b][a] for b in range(n)] for a in range(n)]
        for i in range(len(mats))
    ]
    base = induced_polynomial_module(action.algebra, n, operator, degree)
    key = ("fields", action.algebra.constants, mats, n, degree)
    return _twisted_field_module(action.algebra, base, mats, key)


def action_remainder(action: ActionJet, degree: int) -> Cochain:
    """Degree-d part of the fields, as a 1-cochain valued in degree-d vector
    fields carrying the commutator-with-the-linear-part action."""
    if degree < 2:
        raise ValueError("remainders start at degree 2")
    for i, fld in enumerate(action.fields):
        for comp in fld:
            for low in range(2, degree):
                if not comp.homogeneous_part(low).is_zero():
                    raise PreconditionNotNormalized(
                        f"field {i} still has degree-{low} terms"
                    )
    module = _action_field_module(action, degree)
    d = module.dim // action.nvars
    components = {}
    for i, fld in enumerate(action.fields):
        vec = [ZERO] * module.dim
        nonzero = False
        for a, comp in enumerate(fld):
            part = comp.homogeneous_part(degree)
            if part.is_zero():
                continue
            nonzero = True
            block = homogeneous_to_vector(part, degree)
            for l, x in enumerate(block):
                vec[a * d + l] = x
        if nonzero:
            components[(i,)] = vec
    return Cochain.from_components(module, 1, components)


class _ActionProblem:
    cochain_degree = 1

    def __init__(self, action: ActionJet):
        self.state = action
        self.nvars = action.nvars
        self.order = action.order
        self.accumulated = CoordChange.identity(action.nvars, action.order)

    def module(self, degree: int) -> GModule:
        return _action_field_module(self.state, degree)

    def remainder_vector(self, module: GModule, degree: int):
        return action_remainder(self.state, degree).vector

    def correction_change(self, module: GModule, solution, degree: int) -> CoordChange:
        n = self.nvars
        d = module.dim // n
        comps = []
        for a in range(n):
            block = solution[a * d:(a + 1) * d]
            f = vector_to_homogeneous(n, self.order, degree, block)
            comps.append(Jet.variable(a, n, self.order) - f)
        return CoordChange(comps)

    def apply(self, change: CoordChange) -> None:
        self.accumulated = compose_change(self.accumulated, change)
        self.state = conjugate_action(self.state, change)

    def tail_jets(self):
        return [
            comp - comp.homogeneous_part(1)
            for fld in self.state.fields for comp in fld
        ]

    def finish(self):
        if not self.state.is_linear():
            raise SolverFailure("action not linear after all degrees were cleared")
        return self.state


def linearize_action(action: ActionJet, scheduler: str = "doubling",
                     order: int | None = None, radius=ONE):
    """Linearize a polynomial action; same contract as linearize_poisson with
    1-cochains in place of 2-cochains."""
    if order is None:
        order = action.order
    if order > action.order:
        raise ValueError("target order exceeds the action's truncation")
    problem = _ActionProblem(action.truncate(order) if order != action.order else action)
    obstruction, trace = _run_scheduler(problem, scheduler, order, radius)
    if obstruction is not None:
        return obstruction, trace
    return problem.accumulated, problem.finish(), trace


# ---------------------------------------------------------------------------
# Levi decomposition of a bivector


@dataclass
class LeviNormalForm:
    """Bracket data in adapted coordinates: exact structure constants on the
    s-s and s-r blocks, arbitrary residual jets on the r-r block."""

    s_constants: list   # c[a][b][k]: {x^a, x^b} = sum_k c[a][b][k] x^k
    r_constants: list   # a[i][beta][gamma]: {x^i, y^beta} = sum a[...] y^gamma
    residual: dict      # {(alpha, beta): Jet} on r-r pairs, alpha < beta
    split: LeviSplit
    order: int

    def to_bivector(self) -> PoissonJet:
        """Reassemble the normal form as a validated bivector in the adapted
        coordinates."""
        ns = len(self.s_constants)
        nr = len(self.split.r_basis)
        n = ns + nr
        unit = lambda k: tuple(1 if t == k else 0 for t in range(n))
        brackets = {}
        for a in range(ns):
            for b in range(a + 1, ns):
                terms = {unit(k): self.s_constants[a][b][k]
                         for k in range(ns) if self.s_constants[a][b][k]}
                if terms:
                    brackets[(a, b)] = Jet(n, self.order, terms)
        for a in range(ns):
            for beta in range(nr):
                terms = {unit(ns + gamma): self.r_constants[a][beta][gamma]
                         for gamma in range(nr) if self.r_constants[a][beta][gamma]}
                if terms:
                    brackets[(a, ns + beta)] = Jet(n, self.order, terms)
        for (alpha, beta), jet in self.residual.items():
            if not jet.is_zero():
                brackets[(ns + alpha, ns + beta)] = jet
        return PoissonJet.from_brackets(n, self.order, brackets)


def _require_certified_split(pi: PoissonJet, split: LeviSplit) -> None:
    isotropy = isotropy_from_linear_part(pi)
    if split.algebra != isotropy:
        raise SplitNotCertified(
            "split belongs to a different algebra than the bivector's isotropy"
        )
    try:
        verify_levi_split(isotropy, split.s_basis, split.r_basis)
    except LeviSplitError as exc:
        raise SplitNotCertified(f"{exc.violation}: {exc}") from exc


def levi_decompose(pi: PoissonJet, split: LeviSplit, order: int | None = None,
                   radius=ONE):
    """Normalize the s-s and s-r blocks of the bracket in coordinates adapted
    to a certified Levi split, carrying the r-r block along untouched.

    At each degree the 2-cochain solve on the s-s block runs first, then the
    1-cochain solve on the s-r columns; both succeed because s is semisimple.
    Returns (CoordChange, LeviNormalForm, IterationTrace).
    """
    _require_certified_split(pi, split)
    if order is None:
        order = pi.order
    if order > pi.order:
        raise ValueError("target order exceeds the bivector's truncation")
    n = pi.nvars
    ns = len(split.s_basis)
    nr = len(split.r_basis)
    trace = IterationTrace("levi", Fraction(radius), order)

    adapt = CoordChange.linear(
        [list(v) for v in split.s_basis + split.r_basis], order
    )
    current = pushforward(pi.truncate(order) if order != pi.order else pi, adapt)
    accumulated = adapt

    if ns == 0:
        residual = {
            (a, b): current.entries[a][b]
            for a in range(n) for b in range(a + 1, n)
            if not current.entries[a][b].is_zero()
        }
        return accumulated, LeviNormalForm([], [], residual, split, order), trace

    adapted_algebra = isotropy_from_linear_part(current)
    c_full = adapted_algebra.constants
    s_constants = [[[c_full[a][b][k] for k in range(ns)] for b in range(ns)]
                   for a in range(ns)]
    r_constants = [[[c_full[a][ns + beta][ns + gamma] for gamma in range(nr)]
                    for beta in range(nr)] for a in range(ns)]
    s_algebra = LieAlgebra(s_constants)
    # restriction of the full coadjoint rep to the s-generators
    s_rep = tuple(
        tuple(tuple(c_full[a][j][k] for j in range(n)) for k in range(n))
        for a in range(ns)
    )
    twists = tuple(
        tuple(tuple(r_constants[a][beta][gamma] for gamma in range(nr))
              for beta in range(nr))
        for a in range(ns)
    )

    def normalized_tail():
        jets = [
            current.entries[a][b] - current.entries[a][b].homogeneous_part(1)
            for a in range(ns) for b in range(a + 1, ns)
        ]
        jets.extend(
            current.entries[a][ns + beta] - current.entries[a][ns + beta].homogeneous_part(1)
            for a in range(ns) for beta in range(nr)
        )
        return jets

    for degree in range(2, order + 1):
        lowest_before, norm_before = _tail_stats(normalized_tail(), radius)
        if lowest_before is None or lowest_before > degree:
            continue
        did_work = False
        v_module = induced_polynomial_module(s_algebra, n, s_rep, degree)

        components = {}
        for a in range(ns):
            for b in range(a + 1, ns):
                part = current.entries[a][b].homogeneous_part(degree)
                if not part.is_zero():
                    components[(a, b)] = _module_vector(part, v_module)
        if components:
            did_work = True
            target = Cochain.from_components(v_module, 2, components)
            solution = v_module.coboundary_solver(2).solve(target.vector)
            if solution is None:
                raise SolverFailure("2-cochain solve failed on a semisimple factor")
            comps = []
            for t in range(n):
                if t < ns:
                    block = solution[t * v_module.dim:(t + 1) * v_module.dim]
                    f = vector_to_homogeneous(n, order, degree, block)
                    comps.append(Jet.variable(t, n, order) - f)
                else:
                    comps.append(Jet.variable(t, n, order))
            change = CoordChange(comps)
            current = pushforward(current, change)
            accumulated = compose_change(accumulated, change)

        if nr:
            key = ("levi-sr", s_algebra.constants, s_rep, n, degree, twists)
            u_module = _twisted_field_module(s_algebra, v_module, twists, key)
            components = {}
            for a in range(ns):
                vec = [ZERO] * u_module.dim
                nonzero = False
                for beta in range(nr):
                    part = current.entries[a][ns + beta].homogeneous_part(degree)
                    if part.is_zero():
                        continue
                    nonzero = True
                    block = _module_vector(part, v_module)
                    for l, x in enumerate(block):
                        vec[beta * v_module.dim + l] = x
                if nonzero:
                    components[(a,)] = vec
            if components:
                did_work = True
                target = Cochain.from_components(u_module, 1, components)
                solution = u_module.coboundary_solver(1).solve(target.vector)
                if solution is None:
                    raise SolverFailure("1-cochain solve failed on a semisimple factor")
                comps = []
                for t in range(n):
                    if t < ns:
                        comps.append(Jet.variable(t, n, order))
                    else:
                        beta = t - ns
                        block = solution[beta * v_module.dim:(beta + 1) * v_module.dim]
                        g = vector_to_homogeneous(n, order, degree, block)
                        comps.append(Jet.variable(t, n, order) - g)
                change = CoordChange(comps)
                current = pushforward(current, change)
                accumulated = compose_change(accumulated, change)

        if did_work:
            lowest_after, norm_after = _tail_stats(normalized_tail(), radius)
            trace.steps.append(IterationStep(
                degree, (degree,), lowest_before, lowest_after,
                norm_before, norm_after,
            ))

    leftover, _ = _tail_stats(normalized_tail(), radius)
    if leftover is not None:
        raise SolverFailure("normalized blocks not exactly linear after the loop")

    residual = {
        (alpha, beta): current.entries[ns + alpha][ns + beta]
        for alpha in range(nr) for beta in range(alpha + 1, nr)
        if not current.entries[ns + alpha][ns + beta].is_zero()
    }
    form = LeviNormalForm(s_constants, r_constants, residual, split, order)
    return accumulated, form, trace
