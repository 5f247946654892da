"""System model: (N, {b_k}, {t_k}) with eventually periodic sequence specs.

The integer skeleton s_k = tau_N(b_1...b_k) - tau_N(t_k) - 1 drives every
tiling and spectral decision in the package. For eventually periodic
sequences s gains a fixed increment per period (the drift), so each
"for every k" claim below reduces to a finite scan; every certification
site documents the window arithmetic it relies on.

Conventions: sequences are 1-based; b products written B_k mean b_1*...*b_k;
"prefix mode" means a finite sequence with a declared horizon and no claims
beyond it.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import lcm
from typing import Optional, Union

from .errors import (
    DomainError,
    HorizonError,
    PreconditionError,
    UnsupportedCaseError,
)
from .numthy import Valuation, _valuation_unchecked, check_prime_base

_PREFIX_CERT_MARGIN = 12


@dataclass(frozen=True)
class SequenceSpec:
    """An integer sequence given as preperiod + repeating period, or as a
    finite prefix (period empty) with horizon = len(preperiod)."""

    preperiod: tuple = ()
    period: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "preperiod", tuple(self.preperiod))
        object.__setattr__(self, "period", tuple(self.period))
        for a in self.preperiod + self.period:
            if not isinstance(a, int):
                raise DomainError(f"sequence entries must be integers, got {a!r}")
            if a == 0:
                raise DomainError("sequence entries must be nonzero")

    @classmethod
    def periodic(cls, period, preperiod=()) -> "SequenceSpec":
        if not period:
            raise DomainError("period must be nonempty")
        return cls(tuple(preperiod), tuple(period))

    @classmethod
    def prefix(cls, entries) -> "SequenceSpec":
        return cls(tuple(entries), ())

    @property
    def is_periodic(self) -> bool:
        return bool(self.period)

    @property
    def horizon(self) -> Optional[int]:
        """None for periodic specs (all indices defined), else the last index."""
        return None if self.period else len(self.preperiod)

    def entry(self, k: int) -> int:
        if k < 1:
            raise DomainError(f"sequence index must be >= 1, got {k}")
        if k <= len(self.preperiod):
            return self.preperiod[k - 1]
        if not self.period:
            raise HorizonError(
                f"index {k} beyond finite prefix horizon {len(self.preperiod)}"
            )
        return self.period[(k - len(self.preperiod) - 1) % len(self.period)]

    def entries(self, upto: int) -> list:
        return [self.entry(k) for k in range(1, upto + 1)]

    def all_values(self) -> tuple:
        return self.preperiod + self.period


@dataclass
class MoranSystem:
    """A system (N, b, t) defining digit sets D_k = {0,...,N-1} * t_k and the
    infinite convolution of the uniform measures on D_k / (b_1...b_k).

    normalized_exponent is 0 for raw systems; normalize() returns a system
    whose b_1 absorbed N^m and records m here.
    """

    N: int
    b: SequenceSpec
    t: SequenceSpec
    normalized_exponent: int = 0
    _skel: "SSkeleton" = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        check_prime_base(self.N)
        for v in self.b.all_values():
            if abs(v) < 2:
                raise DomainError(f"|b_k| >= 2 required, got {v}")
        for v in self.t.all_values():
            if abs(v) < 1:
                raise DomainError(f"|t_k| >= 1 required, got {v}")

    @property
    def skeleton(self) -> "SSkeleton":
        if self._skel is None:
            self._skel = SSkeleton(self)
        return self._skel

    @property
    def is_periodic(self) -> bool:
        return self.b.is_periodic and self.t.is_periodic

    @property
    def horizon(self) -> Optional[int]:
        hs = [h for h in (self.b.horizon, self.t.horizon) if h is not None]
        return min(hs) if hs else None

    def b_entry(self, k: int) -> int:
        return self.b.entry(k)

    def t_entry(self, k: int) -> int:
        return self.t.entry(k)

    def b_product(self, k: int) -> int:
        return self.skeleton.b_product(k)

    def is_normalized(self) -> bool:
        """Positive entries and s_k >= 0 over the decidable range."""
        if any(v < 2 for v in self.b.all_values()):
            return False
        if any(v < 1 for v in self.t.all_values()):
            return False
        sk = self.skeleton
        try:
            return sk.min_s() >= 0
        except HorizonError:
            return False


class SSkeleton:
    """Per-index cache of s_k, N-free parts b'_k / t'_k, their products
    bold_b_k, and the periodic-drift data used for certification.

    The memo lists are append-only and their fills idempotent, so concurrent
    readers are safe.
    """

    def __init__(self, sys: MoranSystem):
        self.sys = sys
        N = sys.N
        self._tau_b = [0]  # tau_N(b_1..b_k) at index k
        self._bprod = [1]  # b_1..b_k
        self._bold = [1]  # b'_1..b'_k
        self._s = [None]
        self._b_free = [None]
        self._t_free = [None]
        self._t_tau = [None]
        self._head_max = [None]
        if sys.is_periodic:
            self.P = max(len(sys.b.preperiod), len(sys.t.preperiod))
            self.p = lcm(len(sys.b.period), len(sys.t.period))
            self.drift = sum(
                _valuation_unchecked(sys.b.entry(self.P + 1 + i), N).exponent
                for i in range(self.p)
            )
        else:
            self.P = None
            self.p = None
            self.drift = None
        self._base_stats = None

    @property
    def is_periodic(self) -> bool:
        return self.sys.is_periodic

    def _extend(self, k: int) -> None:
        N = self.sys.N
        while len(self._s) <= k:
            i = len(self._s)
            b_i = self.sys.b.entry(i)  # raises HorizonError past a prefix
            t_i = self.sys.t.entry(i)
            eb, ub = _valuation_unchecked(b_i, N)
            et, ut = _valuation_unchecked(t_i, N)
            self._tau_b.append(self._tau_b[-1] + eb)
            self._bprod.append(self._bprod[-1] * b_i)
            self._bold.append(self._bold[-1] * ub)
            s_i = self._tau_b[-1] - et - 1
            self._s.append(s_i)
            self._b_free.append(ub)
            self._t_free.append(ut)
            self._t_tau.append(et)
            prev = self._head_max[-1]
            self._head_max.append(s_i if prev is None else max(prev, s_i))

    def s(self, k: int) -> int:
        if k < 1:
            raise DomainError(f"index must be >= 1, got {k}")
        self._extend(k)
        return self._s[k]

    def tau_b_prefix(self, k: int) -> int:
        self._extend(k)
        return self._tau_b[k]

    def b_product(self, k: int) -> int:
        self._extend(k)
        return self._bprod[k]

    def bold_b(self, k: int) -> int:
        if k < 1:
            raise DomainError(f"index must be >= 1, got {k}")
        self._extend(k)
        return self._bold[k]

    def b_free(self, k: int) -> int:
        self._extend(k)
        return self._b_free[k]

    def t_free(self, k: int) -> int:
        self._extend(k)
        return self._t_free[k]

    def t_tau(self, k: int) -> int:
        self._extend(k)
        return self._t_tau[k]

    def head_max(self, k: int) -> int:
        """max of s_1..s_k."""
        self._extend(k)
        return self._head_max[k]

    # -- periodic-drift machinery ------------------------------------------

    def base_stats(self):
        """(v_min, v_max) of s over the periodic base window (P, P+p], plus
        R = spread of s over [1, P+2p]. Periodic specs only."""
        if not self.is_periodic:
            raise HorizonError("periodic structure required")
        if self._base_stats is None:
            P, p = self.P, self.p
            vals_base = [self.s(j) for j in range(P + 1, P + p + 1)]
            vals_all = [self.s(j) for j in range(1, P + 2 * p + 1)]
            self._base_stats = (
                min(vals_base),
                max(vals_base),
                max(vals_all) - min(vals_all),
            )
        return self._base_stats

    def cert_window(self) -> int:
        """Window size past which s-comparisons are forced by the drift.

        With drift D > 0 the value at class r and level q is s_{P+r} + q*D,
        so two indices can only compare non-trivially when their levels
        differ by at most R/D; preperiod + (ceil(R/D) + 3) periods covers
        every undecided comparison.
        """
        if not self.is_periodic:
            raise HorizonError("periodic structure required")
        if self.drift == 0:
            return self.P + 2 * self.p
        _, _, R = self.base_stats()
        return self.P + (-(-R // self.drift) + 3) * self.p

    def tail_min(self, k: int) -> int:
        """min{s_j : j > k}, certified.

        For j past the scanned range every class sits at a strictly higher
        drift level than a scanned occurrence, so the scan minimum is the
        true infimum (drift > 0); with drift 0 one extra period repeats all
        tail values.
        """
        if not self.is_periodic:
            raise HorizonError("tail minimum undecidable for finite prefix")
        P, p, D = self.P, self.p, self.drift
        if D == 0:
            J = max(k, P) + p
        else:
            _, _, R = self.base_stats()
            J = max(k, P) + (-(-R // D) + 2) * p
        return min(self.s(j) for j in range(k + 1, J + 1))

    def min_s(self) -> int:
        """Global minimum of s over the decidable range (periodic: certified
        by the nonnegative drift; prefix: the window minimum)."""
        if self.is_periodic:
            upto = self.P + 2 * self.p
        else:
            upto = self.sys.horizon
            if upto == 0:
                return 0
        return min(self.s(k) for k in range(1, upto + 1))


# -- result types ----------------------------------------------------------


@dataclass(frozen=True)
class Distinct:
    window: int
    certified_all: bool


@dataclass(frozen=True)
class Collision:
    i: int
    j: int


@dataclass(frozen=True)
class CaseI:
    breakpoints: tuple
    window: int
    period: int
    certified: bool = True


@dataclass(frozen=True)
class CaseII:
    k0: int
    window: int
    certified: bool = True


@dataclass(frozen=True)
class Undetermined:
    reason: str


@dataclass(frozen=True)
class Converges:
    partial_sum: Fraction
    tail_bound: Fraction
    depth: int


@dataclass(frozen=True)
class Diverges:
    witness: int
    period: int


@dataclass(frozen=True)
class Unknown:
    partial_sum: Fraction
    depth: int


@dataclass(frozen=True)
class Satisfied:
    m0: int
    certified: bool = True


@dataclass(frozen=True)
class Violated:
    k: int
    certified: bool = True


# -- operations ------------------------------------------------------------


def s_value(sys: MoranSystem, k: int) -> int:
    """s_k = tau_N(b_1...b_k) - tau_N(t_k) - 1; may be negative for raw systems."""
    return sys.skeleton.s(k)


def bold_b(sys: MoranSystem, k: int) -> int:
    """Product of the N-free parts b'_1...b'_k; coprime to N."""
    return sys.skeleton.bold_b(k)


def default_window(sys: MoranSystem) -> int:
    sk = sys.skeleton
    if sys.is_periodic:
        return max(sk.P + 2 * sk.p, 12)
    return sys.horizon


def distinctness_check(
    sys: MoranSystem, window: Optional[int] = None
) -> Union[Distinct, Collision]:
    """Decide whether the s_k are pairwise distinct.

    Periodic specs are decided for ALL indices: with drift 0 the values
    repeat each period (so a collision always exists and is found within
    preperiod + two periods); with positive drift any collision reappears
    translated one period earlier, hence a minimal collision lives inside
    the certification window. Prefix specs are reported on the window only.
    Collision carries the smallest witnessing pair.
    """
    sk = sys.skeleton
    if sys.is_periodic:
        scan_to = sk.cert_window()
        certified = True
    else:
        scan_to = sys.horizon if window is None else min(window, sys.horizon)
        certified = False
    first_seen = {}
    for k in range(1, scan_to + 1):
        v = sk.s(k)
        if v in first_seen:
            return Collision(first_seen[v], k)
        first_seen[v] = k
    return Distinct(scan_to, certified)


def breakpoint_predicate(sys: MoranSystem, k: int) -> bool:
    """True iff min{s_j : j > k} > max{s_j : j <= k} (certified tail min)."""
    sk = sys.skeleton
    return sk.tail_min(k) > sk.head_max(k)


def case_classify(
    sys: MoranSystem, window: Optional[int] = None
) -> Union[CaseI, CaseII, Undetermined]:
    """Classify the system by whether later s eventually dominate earlier s.

    Relies on the verdicts being eventually periodic: past the certification
    window both the running head maximum and the certified tail minimum gain
    exactly drift per period, so the pattern over one further period is the
    pattern forever.
    """
    check = distinctness_check(sys)
    if isinstance(check, Collision):
        raise PreconditionError(
            f"s-values collide at ({check.i}, {check.j}); classification "
            "requires distinctness"
        )
    if not sys.is_periodic:
        return Undetermined("finite prefix: tail behavior beyond horizon unknown")
    sk = sys.skeleton
    W = sk.cert_window()
    p = sk.p
    report_to = max(window or 0, W + p)
    verdicts = {k: breakpoint_predicate(sys, k) for k in range(1, report_to + 1)}
    final = [verdicts[k] for k in range(W + 1, W + p + 1)]
    if any(final):
        bps = tuple(k for k in range(1, report_to + 1) if verdicts[k])
        return CaseI(bps, report_to, p)
    last_bp = max((k for k in range(1, W + p + 1) if verdicts[k]), default=0)
    return CaseII(last_bp + 1, W + p)


def frak_n(sys: MoranSystem, k: int, margin: Optional[int] = None) -> int:
    """max{j >= k : s_k >= s_j}, certified finite.

    Periodic specs with positive drift certify directly: beyond
    P + (floor((s_k - v_min)/drift) + 2) periods every class value exceeds
    s_k. Prefix specs certify only s_j > s_k on a trailing margin inside the
    horizon and refuse when the margin does not fit.
    """
    sk = sys.skeleton
    sv = sk.s(k)
    if sys.is_periodic:
        if sk.drift == 0:
            raise PreconditionError(
                "zero period drift: s repeats, frak_n is unbounded or "
                "distinctness already fails"
            )
        v_min, _, _ = sk.base_stats()
        q_min = max(0, (sv - v_min) // sk.drift + 1)
        J = max(k, sk.P + (q_min + 1) * sk.p)
        best = k
        for j in range(k, J + 1):
            if sk.s(j) <= sv:
                best = j
        return best
    H = sys.horizon
    margin = _PREFIX_CERT_MARGIN if margin is None else margin
    best = k
    for j in range(k, H + 1):
        if sk.s(j) <= sv:
            best = j
    if best + margin > H:
        raise HorizonError(
            f"horizon insufficient: cannot certify s_j > s_{k} past j={best} "
            f"(margin {margin} exceeds horizon {H})"
        )
    return best


def alpha_bound(sys: MoranSystem, window: int) -> int:
    """max of frak_n(k) - k over k <= window.

    For periodic specs with positive drift the quantity is constant on each
    residue class past the preperiod (the whole comparison picture shifts by
    one period), so any window covering preperiod + two periods yields the
    true supremum.
    """
    if window < 1:
        raise DomainError("window must be >= 1")
    return max(frak_n(sys, k) - k for k in range(1, window + 1))


def alpha_true(sys: MoranSystem) -> int:
    """The true sup of frak_n(k) - k for a periodic rule (certified window)."""
    sk = sys.skeleton
    if not sys.is_periodic:
        raise HorizonError("true alpha requires a periodic scale rule")
    return alpha_bound(sys, sk.P + 2 * sk.p)


def existence_check(
    N_spec: SequenceSpec, t_spec: SequenceSpec, b_spec: SequenceSpec, depth: int
) -> Union[Converges, Diverges, Unknown]:
    """Three-series style existence test: does sum |N_k t_k / (b_1...b_k)|
    converge?

    General integer sequences are allowed here (entries only need to be
    nonzero). For fully periodic specs the answer is exact: past the
    preperiod the terms scale by 1/|period product of b| every period, so
    the remaining sum is a finite block plus a geometric closed form, and
    |period product| = 1 means the terms repeat forever without decay.
    """
    if depth < 0:
        raise DomainError("depth must be >= 0")
    partial = Fraction(0)

    def term(k):
        return Fraction(
            abs(N_spec.entry(k) * t_spec.entry(k)), abs(_bprod(k))
        )

    prods = [1]

    def _bprod(k):
        while len(prods) <= k:
            prods.append(prods[-1] * b_spec.entry(len(prods)))
        return prods[k]

    all_periodic = (
        N_spec.is_periodic and t_spec.is_periodic and b_spec.is_periodic
    )
    for k in range(1, depth + 1):
        partial += term(k)
    if not all_periodic:
        return Unknown(partial, depth)
    P = max(len(N_spec.preperiod), len(t_spec.preperiod), len(b_spec.preperiod))
    p = lcm(
        len(N_spec.period) or 1, len(t_spec.period) or 1, len(b_spec.period) or 1
    )
    Bp = 1
    for i in range(p):
        Bp *= b_spec.entry(P + 1 + i)
    if abs(Bp) == 1:
        return Diverges(P + 1, p)
    J = max(depth + 1, P + 1)
    head = sum((term(k) for k in range(depth + 1, J)), Fraction(0))
    G = sum((term(k) for k in range(J, J + p)), Fraction(0))
    tail = head + G * Fraction(abs(Bp), abs(Bp) - 1)
    return Converges(partial, tail, depth)


def jessen_wintner_series(
    N_spec: SequenceSpec,
    t_spec: SequenceSpec,
    b_spec: SequenceSpec,
    k_max: int,
    r=1,
):
    """Partial sums of the three convergence-test series for the component
    measures omega_k = uniform measure on D_k/(b_1...b_k), truncated to the
    ball of radius r.

    Returns exact rationals (S1, S2, S3): total mass outside the ball, mean
    of the truncated measure, and its variance. Positive entries only; the
    k-th atoms are d*t_k/(b_1..b_k) for d = 0..N_k-1 with mass 1/N_k, and
    the closed forms below are the arithmetic-series sums over the atoms
    that stay inside the ball.
    """
    if k_max < 0:
        raise DomainError("k_max must be >= 0")
    r = Fraction(r)
    if r <= 0:
        raise DomainError("ball radius must be positive")
    S1 = Fraction(0)
    S2 = Fraction(0)
    S3 = Fraction(0)
    B = 1
    for k in range(1, k_max + 1):
        Nk = N_spec.entry(k)
        tk = t_spec.entry(k)
        bk = b_spec.entry(k)
        if Nk < 2 or tk < 1 or bk < 2:
            raise UnsupportedCaseError(
                f"signed or degenerate entries unsupported at k={k}: "
                f"N={Nk}, t={tk}, b={bk}"
            )
        B *= bk
        cutoff = r * Fraction(B, tk)
        f = min(Nk - 1, cutoff.numerator // cutoff.denominator)
        S1 += Fraction(Nk - 1 - f, Nk)
        c = Fraction(tk, B) * Fraction(f * (f + 1), 2) / Nk
        S2 += c
        x2 = Fraction(tk * tk, B * B) * Fraction(f * (f + 1) * (2 * f + 1), 6) / Nk
        S3 += x2 - c * c
    return (S1, S2, S3)


def normalize(sys: MoranSystem):
    """Scale b_1 by N^m, m = max(0, -min_k s_k), so all s-values become
    nonnegative.

    If nu(E) := mu(N^m E) then nu is the system with b_1 replaced by
    N^m b_1 (same digits), nu_hat(xi) = mu_hat(xi / N^m), and Lambda is a
    spectrum of mu iff N^m Lambda is a spectrum of nu; spectra built for the
    returned system are divided by N^m on output. The minimum of s over
    preperiod + two periods is the global minimum because class values only
    gain drift.
    """
    for v in sys.b.all_values():
        if v < 2:
            raise UnsupportedCaseError("normalize requires b_k >= 2")
    for v in sys.t.all_values():
        if v < 1:
            raise UnsupportedCaseError("normalize requires t_k >= 1")
    sk = sys.skeleton
    m = max(0, -sk.min_s())
    if m == 0:
        return (replace(sys, _skel=None), 0)
    Nm = sys.N ** m
    b = sys.b
    if b.preperiod:
        new_b = SequenceSpec((Nm * b.preperiod[0],) + b.preperiod[1:], b.period)
    else:
        new_b = SequenceSpec((Nm * b.period[0],), b.period[1:] + b.period[:1])
    sysn = MoranSystem(sys.N, new_b, sys.t, normalized_exponent=m)
    return (sysn, m)


def hypothesis_holds_from(sys: MoranSystem, start: int):
    """Check |b_k| > (N-1)|t_k| for every k >= start; returns the first
    violating index or None. Periodic specs certify the infinite tail by
    scanning through one full period past max(start, preperiod)."""
    N = sys.N
    if sys.is_periodic:
        sk = sys.skeleton
        upto = max(start, sk.P) + sk.p
    else:
        upto = sys.horizon
    for k in range(start, upto + 1):
        if abs(sys.b.entry(k)) <= (N - 1) * abs(sys.t.entry(k)):
            return k
    return None


def spectral_hypothesis_check(sys: MoranSystem) -> Union[Satisfied, Violated]:
    """Does |b_k| > (N-1)|t_k| hold for all k past some m_0?

    Periodic specs are decided exactly: a violation inside the periodic part
    recurs forever (no m_0 exists), otherwise m_0 is one past the last
    preperiod violation. Prefix specs report on the window, uncertified.
    """
    N = sys.N

    def ok(k):
        return abs(sys.b.entry(k)) > (N - 1) * abs(sys.t.entry(k))

    if sys.is_periodic:
        sk = sys.skeleton
        P, p = sk.P, sk.p
        for k in range(P + 1, P + p + 1):
            if not ok(k):
                return Violated(k)
        bad = [k for k in range(1, P + 1) if not ok(k)]
        return Satisfied((bad[-1] + 1) if bad else 1)
    H = sys.horizon
    bad = [k for k in range(1, H + 1) if not ok(k)]
    if not bad:
        return Satisfied(1, certified=False)
    if bad[-1] < H:
        return Satisfied(bad[-1] + 1, certified=False)
    return Violated(bad[0], certified=False)
