"""Candidate spectrum construction with exact verification.

Levels are assembled block by block. Each block is a direct sum of scaled
digit copies whose coefficients depend on how the level exponents
interleave with their carried indices, and every nonzero block element
picks up one integer offset chosen so the infinite tail of the transform
stays certifiably away from zero. Orthogonality and completeness checks
run on exact integers; floats appear only inside certified tail bounds.
"""

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from .errors import (
    DomainError,
    HorizonError,
    MoranError,
    PreconditionError,
    ResourceError,
    UnsupportedCaseError,
)
from .fourier import m_factor, mu_hat_shifted_grid, nu_hat_tail, zero_set_member
from .system import (
    CaseI,
    CaseII,
    Collision,
    MoranSystem,
    Undetermined,
    Violated,
    alpha_true,
    case_classify,
    distinctness_check,
    frak_n,
    normalize,
    spectral_hypothesis_check,
)
from .tiling import ELEMENT_CAP

_FACTOR_FLOOR = 1e-6


@dataclass(frozen=True)
class SpectrumBuildParams:
    """Tunable thresholds for offset search and certification.

    C gates the offset search (certified tail modulus must exceed it), K
    bounds the offset window, theta0 and sigma0 are neighborhood radii
    for breakpoint admissibility, epsilon0 is the tail floor demanded of
    finished levels, and depth is the tail truncation length.
    """

    C: float = 1e-3
    K: int = 32
    theta0: Union[Fraction, float] = Fraction(1, 4)
    sigma0: Union[Fraction, float] = Fraction(1, 4)
    epsilon0: float = 1e-4
    depth: int = 16

    def __post_init__(self):
        if self.C <= 0 or self.epsilon0 <= 0:
            raise DomainError("thresholds must be positive")
        if self.K < 1 or self.depth < 1:
            raise DomainError("search window and depth must be >= 1")
        if self.theta0 <= 0 or self.sigma0 <= 0:
            raise DomainError("neighborhood radii must be positive")
        if self.sigma0 > self.theta0:
            raise DomainError("sigma0 must not exceed theta0")


@dataclass(frozen=True)
class SpectrumBlock:
    """One direct-sum block covering the index range (k1, k2].

    coefficients[i] belongs to index k1+1+i; elements are the raw digit
    sums before any offset; anchor is the product length whose scale
    multiplies offsets; offsets, once filled, align with elements and
    keep the zero element at offset zero. factor_floor records the
    smallest carried factor modulus observed between k2 and the anchor.
    """

    k1: int
    k2: int
    coefficients: tuple
    elements: tuple
    anchor: int
    offsets: Optional[tuple] = None
    factor_floor: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(self.coefficients))
        object.__setattr__(self, "elements", tuple(self.elements))
        if self.k1 < 0 or self.k2 < self.k1:
            raise DomainError("block range must satisfy 0 <= k1 <= k2")
        if self.anchor < self.k2:
            raise DomainError("anchor must be at least the block end")
        if len(self.coefficients) != self.k2 - self.k1:
            raise DomainError("need one coefficient per index in the range")
        if len(set(self.elements)) != len(self.elements):
            raise DomainError("block elements must be distinct")
        if 0 not in self.elements:
            raise DomainError("the zero element anchors every block")
        if self.offsets is not None:
            object.__setattr__(self, "offsets", tuple(self.offsets))
            if len(self.offsets) != len(self.elements):
                raise DomainError("need one offset per element")
            if self.offsets[self.elements.index(0)] != 0:
                raise DomainError("the zero element must keep offset zero")


@dataclass(frozen=True)
class SpectrumLevel:
    """A candidate spectrum for one finite level of the measure.

    breakpoints starts at 0 and records every block end; level counts the
    blocks. scale_exponent m means emitted elements describe the original
    system after division by N^m. Verification flags stay None until the
    corresponding check has run.
    """

    level: int
    breakpoints: tuple
    elements: tuple
    scale_exponent: int = 0
    blocks: tuple = ()
    orthogonal: Optional[bool] = None
    complete: Optional[bool] = None
    tail_bound: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "breakpoints", tuple(self.breakpoints))
        object.__setattr__(self, "elements", tuple(self.elements))
        object.__setattr__(self, "blocks", tuple(self.blocks))
        if not self.breakpoints or self.breakpoints[0] != 0:
            raise DomainError("breakpoints must start at 0")
        if any(a >= b for a, b in zip(self.breakpoints, self.breakpoints[1:])):
            raise DomainError("breakpoints must strictly increase")
        if self.level != len(self.breakpoints) - 1:
            raise DomainError("level must equal the number of blocks")
        if len(self.blocks) != self.level:
            raise DomainError("need one block record per level step")
        if 0 not in self.elements:
            raise DomainError("0 must belong to every level")
        if any(a >= b for a, b in zip(self.elements, self.elements[1:])):
            raise DomainError("elements must be sorted and distinct")


def trivial_level(scale_exponent: int = 0) -> SpectrumLevel:
    return SpectrumLevel(0, (0,), (0,), scale_exponent)


@dataclass(frozen=True)
class QGridReport:
    max_deviation: float
    argmax: float
    passed: bool
    tol: float


# -- block construction ----------------------------------------------------


def omega_split(sys: MoranSystem, k1: int, k2: int, alpha: int):
    """Split (k1, k2] by whether a carried free product stays small.

    An index j joins the first part when the largest upcoming digit free
    part times the free product at j's carried index stays strictly below
    the free product at k2+1; everything else joins the second part. The
    comparison is exact integer arithmetic.
    """
    if k1 < 0 or k2 < k1:
        raise DomainError("range must satisfy 0 <= k1 <= k2")
    if alpha < 0:
        raise DomainError("alpha must be >= 0")
    if k2 == k1:
        return ((), ())
    sk = sys.skeleton
    tmax = max((abs(sk.t_free(k2 + i)) for i in range(1, alpha + 1)), default=0)
    bound = abs(sk.bold_b(k2 + 1))
    first, second = [], []
    for j in range(k1 + 1, k2 + 1):
        if tmax * abs(sk.bold_b(frak_n(sys, j))) < bound:
            first.append(j)
        else:
            second.append(j)
    return (tuple(first), tuple(second))


def build_block(sys: MoranSystem, k1: int, k2: int, case, alpha: int) -> SpectrumBlock:
    """Assemble the direct-sum block on (k1, k2]; offsets come later.

    Coefficients are all one when later exponents dominate infinitely
    often; otherwise indices split and carry either a sign or a product
    of digit free parts up to the anchor. Every coefficient stays coprime
    to the base, so the digit sums are pairwise distinct whenever the
    level exponents are.
    """
    if k1 < 0 or k2 < k1:
        raise DomainError("range must satisfy 0 <= k1 <= k2")
    extended = isinstance(case, CaseII)
    anchor = k2 + alpha if extended else k2
    count = sys.N ** (k2 - k1)
    if count > ELEMENT_CAP:
        raise ResourceError(f"block would hold {count} elements, above {ELEMENT_CAP}")
    sk = sys.skeleton
    indices = range(k1 + 1, k2 + 1)
    carried = {j: frak_n(sys, j) for j in indices}
    for j in indices:
        if sk.s(j) < 0:
            raise PreconditionError(
                f"level exponent s_{j} = {sk.s(j)} is negative; normalize first"
            )
        if carried[j] > anchor:
            raise PreconditionError(
                f"anchor {anchor} sits below carried index {carried[j]} of "
                f"level {j}; {k2} is not an admissible block end"
            )
    small = set(omega_split(sys, k1, k2, alpha)[0]) if extended else set()
    coeffs = []
    for j in indices:
        if not extended:
            c = 1
        elif j in small:
            c = (-1) ** sk.s(j)
        else:
            c = 1
            for i in range(carried[j] + 1, k2 + alpha + 1):
                c *= sk.b_free(i)
        if c % sys.N == 0:
            raise MoranError(f"coefficient at level {j} shares a factor with the base")
        coeffs.append(c)
    sums = [0]
    for j, c in zip(indices, coeffs):
        g = sys.N ** sk.s(j) * sk.bold_b(carried[j]) * c
        sums = [a + d * g for a in sums for d in range(sys.N)]
    if len(set(sums)) != count:
        raise MoranError(
            f"digit sums collide inside block ({k1}, {k2}]; level exponents "
            "cannot be pairwise distinct"
        )
    return SpectrumBlock(k1, k2, tuple(coeffs), tuple(sorted(sums)), anchor)


# -- offset search ---------------------------------------------------------


def _window_order(K):
    yield 0
    for z in range(1, K + 1):
        yield z
        yield -z


def _qualifying_offset(sys, k, xs, params):
    best_z = None
    best_lower = None
    best_pair = (0.0, 0.0)
    for z in _window_order(params.K):
        worst = None
        pair = (0.0, 0.0)
        for x in xs:
            value, err = nu_hat_tail(sys, k, x + z, params.depth)
            lower = abs(value) - err
            if worst is None or lower < worst:
                worst = lower
                pair = (abs(value), err)
            if lower <= params.C:
                break
        if worst > params.C:
            return z
        if best_lower is None or worst > best_lower:
            best_z, best_lower, best_pair = z, worst, pair
    raise ResourceError(
        f"equi-positivity search failed: best offset {best_z} pins the tail "
        f"modulus inside [{best_pair[0] - best_pair[1]:.4g}, "
        f"{best_pair[0] + best_pair[1]:.4g}] against threshold {params.C}; "
        f"enlarge the window K={params.K} or lower C"
    )


def offset_search(sys: MoranSystem, k: int, x, params: Optional[SpectrumBuildParams] = None) -> int:
    """Smallest-magnitude integer shift whose tail modulus clears C.

    Candidates run 0, 1, -1, 2, -2, ... out to K; the first one whose
    certified lower bound (value minus truncation error) exceeds C wins.
    x = 0 returns 0 immediately, where the tail value is exactly one.
    """
    params = params or SpectrumBuildParams()
    if x == 0:
        return 0
    return _qualifying_offset(sys, k, [x], params)


# -- level assembly --------------------------------------------------------


def build_level(
    sys: MoranSystem,
    prev: SpectrumLevel,
    k_prev: int,
    k_next: int,
    case,
    params: Optional[SpectrumBuildParams] = None,
) -> SpectrumLevel:
    """Extend a verified level by one block ending at k_next.

    Each nonzero block element receives a single offset certified against
    every element of the previous level, and the zero element keeps
    offset zero so the previous level embeds unchanged.
    """
    params = params or SpectrumBuildParams()
    if k_prev != prev.breakpoints[-1]:
        raise PreconditionError(
            f"previous level ends at {prev.breakpoints[-1]}, not {k_prev}"
        )
    if k_next < k_prev:
        raise DomainError("block end must not precede the previous one")
    if k_next == k_prev:
        return prev
    if len(prev.elements) != sys.N ** k_prev:
        raise PreconditionError("previous level is incomplete")
    alpha = alpha_true(sys) if isinstance(case, CaseII) else 0
    block = build_block(sys, k_prev, k_next, case, alpha)
    Bm = sys.b_product(block.anchor)
    offsets = []
    out = []
    for lam_b in block.elements:
        if lam_b == 0:
            z = 0
        else:
            xs = [Fraction(lp + lam_b, Bm) for lp in prev.elements]
            z = _qualifying_offset(sys, block.anchor, xs, params)
        offsets.append(z)
        shifted = lam_b + Bm * z
        out.extend(lp + shifted for lp in prev.elements)
    if len(set(out)) != len(out):
        raise MoranError(
            f"offset block sums collide with the previous level on "
            f"({k_prev}, {k_next}]"
        )
    block = replace(block, offsets=tuple(offsets))
    return SpectrumLevel(
        level=prev.level + 1,
        breakpoints=prev.breakpoints + (k_next,),
        elements=tuple(sorted(out)),
        scale_exponent=prev.scale_exponent,
        blocks=prev.blocks + (block,),
    )


# -- verification ----------------------------------------------------------


def verify_orthogonal(sys: MoranSystem, lam, k: int):
    """Exact pairwise-difference membership in the level-k zero set.

    Returns (True, None), or (False, witness) with the first positive
    difference that misses every component up to index k.
    """
    elems = sorted(lam)
    if len(set(elems)) != len(elems):
        raise DomainError("candidate spectra must have distinct elements")
    for i in range(len(elems)):
        for j in range(i + 1, len(elems)):
            diff = elems[j] - elems[i]
            member = zero_set_member(sys, diff)
            if member is None or member > k:
                return (False, diff)
    return (True, None)


def verify_spectrum_finite(sys: MoranSystem, lam, k: int) -> bool:
    """Is lam an exact spectrum of the level-k measure?

    The level-k measure needs its full atom count for the dimension
    argument, so colliding digit sums are a precondition failure. Given
    that, an orthogonal family of maximal cardinality is a basis.
    """
    from .tiling import aggregate

    if not aggregate(sys, k).direct:
        raise PreconditionError(
            f"the level-{k} digit sums collide; completeness is undefined"
        )
    if len(set(lam)) != sys.N ** k:
        return False
    return verify_orthogonal(sys, lam, k)[0]


def verify_tail_lower_bound(sys: MoranSystem, lam, k: int, params: Optional[SpectrumBuildParams] = None):
    """Certify the tail modulus beyond level k on every scaled element.

    Returns (ok, bound, witness): bound is the smallest certified lower
    value over lam, witness the offending element when ok is False.
    """
    params = params or SpectrumBuildParams()
    B = sys.b_product(k)
    worst = math.inf
    witness = None
    for lam_i in lam:
        value, err = nu_hat_tail(sys, k, Fraction(lam_i, B), params.depth)
        lower = abs(value) - err
        if lower < worst:
            worst = lower
            witness = lam_i
    ok = worst >= params.epsilon0
    return (ok, worst, None if ok else witness)


def extension_factor_floor(sys: MoranSystem, block: SpectrumBlock) -> float:
    """Smallest carried factor modulus between the block end and anchor.

    Infinite when the anchor coincides with the block end; the driver
    fails loudly when this drops to the hard floor, since the offset
    certificates lean on these factors staying away from zero.
    """
    alpha = block.anchor - block.k2
    if alpha == 0:
        return math.inf
    worst = math.inf
    for i in range(1, alpha + 1):
        B = sys.b_product(block.k2 + i)
        t = sys.t_entry(block.k2 + i)
        for lam in block.elements:
            worst = min(worst, abs(m_factor(sys.N, t, Fraction(lam, B))))
    return worst


def q_grid_check(sys: MoranSystem, lam, k: int, grid, tol: float) -> QGridReport:
    """Evaluate the completeness functional on a float grid.

    Sums the squared transform moduli over lam at every grid point and
    reports the worst deviation from one. Shifts by the elements go
    through exact modular reduction per factor, so large elements cost
    no precision.
    """
    xs = np.asarray(list(grid), dtype=float)
    if xs.size == 0:
        raise DomainError("grid must be nonempty")
    total = np.zeros(xs.shape)
    for lam_i in lam:
        total += np.abs(mu_hat_shifted_grid(sys, k, xs, int(lam_i))) ** 2
    dev = np.abs(total - 1.0)
    i = int(np.argmax(dev))
    return QGridReport(float(dev[i]), float(xs[i]), bool(dev[i] <= tol), float(tol))


# -- drivers ---------------------------------------------------------------


def _next_breakpoint(sys, case, prev, m0, params):
    last = prev.breakpoints[-1]
    peak = max(abs(e) for e in prev.elements)
    if isinstance(case, CaseI):
        for k in case.breakpoints:
            if k <= last or k < m0:
                continue
            if Fraction(peak, abs(sys.b_product(k))) <= params.sigma0:
                return k
        raise HorizonError(
            f"no admissible block end among {len(case.breakpoints)} classified "
            "breakpoints; classify over a larger window"
        )
    k = max(last, m0 - 1) + 1
    while Fraction(peak, abs(sys.b_product(k))) > params.sigma0:
        k += 1
    return k


def _verify_level(work, level, params):
    k = level.breakpoints[-1]
    ok, wit = verify_orthogonal(work, level.elements, k)
    if not ok:
        raise MoranError(f"built level fails exact orthogonality at difference {wit}")
    if len(level.elements) != work.N ** k:
        raise MoranError("built level has the wrong cardinality")
    ok_tail, bound, wit_tail = verify_tail_lower_bound(work, level.elements, k, params)
    if not ok_tail:
        raise ResourceError(
            f"tail lower bound {bound:.4g} below epsilon0={params.epsilon0} at "
            f"element {wit_tail}; increase depth or adjust thresholds"
        )
    blocks = level.blocks
    newest = blocks[-1]
    if newest.anchor > newest.k2:
        floor = extension_factor_floor(work, newest)
        if floor <= _FACTOR_FLOOR:
            raise MoranError(
                f"carried factor modulus {floor:.3g} at or below "
                f"{_FACTOR_FLOOR}; the coefficient choice is unsound here"
            )
        blocks = blocks[:-1] + (replace(newest, factor_floor=floor),)
    return replace(
        level, orthogonal=True, complete=True, tail_bound=bound, blocks=blocks
    )


def _drive(work, case, m0, blocks, params, scale_exponent, verify):
    levels = [trivial_level(scale_exponent)]
    for i in range(blocks):
        prev = levels[-1]
        if isinstance(case, CaseII) and i == 0:
            k_next = max(case.k0, m0)
        else:
            k_next = _next_breakpoint(work, case, prev, m0, params)
        level = build_level(work, prev, prev.breakpoints[-1], k_next, case, params)
        if verify:
            level = _verify_level(work, level, params)
        levels.append(level)
    return tuple(levels[1:])


def _admission(sys):
    work, m_extra = normalize(sys)
    hyp = spectral_hypothesis_check(work)
    if isinstance(hyp, Violated):
        raise UnsupportedCaseError(
            f"tail certification needs |b_k| > (N-1)|t_k| for all large k; "
            f"index {hyp.k} violates it inside the repeating part"
        )
    return work, m_extra, hyp.m0


def build_spectrum(sys: MoranSystem, n: int, params: Optional[SpectrumBuildParams] = None, window: Optional[int] = None):
    """Drive the full construction: classify, pick block ends, verify.

    Returns the built levels in order. When later exponents dominate
    infinitely often, exactly n levels come back; otherwise a base level
    leads and n extension levels follow it. Construction and checks run
    on the scale-normalized system, and scale_exponent on every level
    records the power of N dividing emitted elements back down.
    """
    params = params or SpectrumBuildParams()
    if n < 1:
        raise DomainError("need at least one level")
    work, m_extra, m0 = _admission(sys)
    check = distinctness_check(work)
    if isinstance(check, Collision):
        raise PreconditionError(
            f"level exponents collide at ({check.i}, {check.j}); no spectrum "
            "of this shape exists"
        )
    case = case_classify(work, window)
    if isinstance(case, Undetermined):
        raise HorizonError(f"cannot classify the system: {case.reason}")
    plan = n if isinstance(case, CaseI) else n + 1
    return _drive(work, case, m0, plan, params, m_extra, verify=True)


def choose_breakpoints(sys: MoranSystem, case_info, n: int, params: Optional[SpectrumBuildParams] = None):
    """Greedy block ends for n levels, discarding the built levels.

    The scan mirrors build_spectrum exactly, offsets included, because
    admissibility of each next end depends on the previous level's actual
    elements.
    """
    params = params or SpectrumBuildParams()
    if n < 1:
        raise DomainError("need at least one level")
    if isinstance(case_info, Undetermined):
        raise HorizonError(f"cannot place block ends: {case_info.reason}")
    work, _, m0 = _admission(sys)
    plan = n if isinstance(case_info, CaseI) else n + 1
    levels = _drive(work, case_info, m0, plan, params, 0, verify=False)
    return levels[-1].breakpoints[1:]


def calibrate_radius(sys: MoranSystem, k: int, params: Optional[SpectrumBuildParams] = None, span: float = 2.0, step: float = 1e-3) -> float:
    """Measured modulus of continuity of the truncated tail over [0, span].

    Diagnostic for choosing neighborhood radii: reports the largest
    step-to-step change of the truncated tail modulus on the grid.
    """
    params = params or SpectrumBuildParams()
    xs = np.arange(0.0, span + step, step)
    vals = np.empty(xs.size)
    for i, x in enumerate(xs):
        value, _ = nu_hat_tail(sys, k, float(x), params.depth)
        vals[i] = abs(value)
    return float(np.max(np.abs(np.diff(vals))))
