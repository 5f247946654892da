"""Tests for the system model and its skeleton diagnostics.

Derived expectations are checked against the reference implementations at
the top of this file, which recompute everything from the definitions with
no shared code beyond the integer type.
"""

import random
from fractions import Fraction
from math import prod

import pytest

from moran.errors import (
    DomainError,
    HorizonError,
    PreconditionError,
    UnsupportedCaseError,
)
from moran.system import (
    CaseI,
    CaseII,
    Collision,
    Converges,
    Distinct,
    Diverges,
    MoranSystem,
    Satisfied,
    SequenceSpec,
    Undetermined,
    Unknown,
    Violated,
    alpha_bound,
    bold_b,
    case_classify,
    default_window,
    distinctness_check,
    existence_check,
    frak_n,
    hypothesis_holds_from,
    jessen_wintner_series,
    normalize,
    s_value,
    spectral_hypothesis_check,
)

# -- reference implementations (oracles) -----------------------------------


def ref_tau(n, N):
    assert n != 0
    e = 0
    n = abs(n)
    while n % N == 0:
        n //= N
        e += 1
    return e


def ref_s(sys, k):
    bs = [sys.b.entry(j) for j in range(1, k + 1)]
    return ref_tau(prod(bs), sys.N) - ref_tau(sys.t.entry(k), sys.N) - 1


def ref_frak_n(sys, k, scan=400):
    js = [j for j in range(k, scan) if ref_s(sys, j) <= ref_s(sys, k)]
    return max(js)


# -- fixtures --------------------------------------------------------------


def example_1(normalized=False):
    sys = MoranSystem(2, SequenceSpec.periodic([18]), SequenceSpec.periodic([1, 4]))
    return normalize(sys)[0] if normalized else sys


def example_2(normalized=False):
    sys = MoranSystem(2, SequenceSpec.periodic([18]), SequenceSpec.periodic([1, 16]))
    return normalize(sys)[0] if normalized else sys


def example_tile_only():
    # N=3, b constant 3, t = 1 then constant 4
    return MoranSystem(
        3, SequenceSpec.periodic([3]), SequenceSpec.periodic([4], preperiod=[1])
    )


# -- SequenceSpec ----------------------------------------------------------


def test_sequence_spec_entry_and_horizon():
    s = SequenceSpec.periodic([7, 8], preperiod=[5])
    assert [s.entry(k) for k in range(1, 6)] == [5, 7, 8, 7, 8]
    assert s.horizon is None
    f = SequenceSpec.prefix([2, 3, 4])
    assert f.horizon == 3
    assert f.entry(3) == 4
    with pytest.raises(HorizonError):
        f.entry(4)


def test_sequence_spec_rejects_zero_entries():
    with pytest.raises(DomainError):
        SequenceSpec.periodic([1, 0])
    with pytest.raises(DomainError):
        SequenceSpec.prefix([0])


def test_moran_system_validates_entries():
    with pytest.raises(DomainError):
        MoranSystem(2, SequenceSpec.periodic([1]), SequenceSpec.periodic([1]))
    with pytest.raises(DomainError):
        MoranSystem(4, SequenceSpec.periodic([8]), SequenceSpec.periodic([1]))


# -- s_value ---------------------------------------------------------------


def test_s_value_golden_closing_examples():
    ex1, ex2 = example_1(), example_2()
    # even/odd closed forms, raw systems
    for k in range(1, 51):
        assert s_value(ex1, 2 * k - 1) == 2 * (k - 1)
        assert s_value(ex1, 2 * k) == 2 * (k - 1) - 1
        assert s_value(ex2, 2 * k) == 2 * (k - 1) - 3
    assert s_value(ex2, 4) == -1
    assert s_value(ex1, 3) == 2


def test_s_value_tile_only_example():
    sys = example_tile_only()
    assert [s_value(sys, k) for k in range(1, 8)] == list(range(7))
    assert s_value(sys, 5) == 4


def test_s_value_matches_reference_on_random_systems():
    rng = random.Random(7)
    for _ in range(25):
        N = rng.choice([2, 3, 5])
        b = SequenceSpec.periodic(
            [rng.choice([2, 3, 4, 6, 9, 12, 18, 20]) for _ in range(rng.randint(1, 3))],
            preperiod=[rng.choice([2, 5, 8]) for _ in range(rng.randint(0, 2))],
        )
        t = SequenceSpec.periodic(
            [rng.randint(1, 20) for _ in range(rng.randint(1, 3))]
        )
        sys = MoranSystem(N, b, t)
        for k in range(1, 40):
            assert s_value(sys, k) == ref_s(sys, k)


def test_bold_b_examples():
    assert bold_b(example_1(), 3) == 729
    assert bold_b(example_1(normalized=True), 2) == 81
    assert bold_b(example_tile_only(), 4) == 1
    sys = example_2(normalized=True)
    assert bold_b(sys, 1) == 9


# -- frak_n / alpha --------------------------------------------------------


def test_frak_n_golden():
    ex1n = example_1(normalized=True)
    ex2n = example_2(normalized=True)
    assert frak_n(ex1n, 1) == 2
    assert frak_n(ex2n, 3) == 6
    # strictly increasing s: the max is attained at j = k
    sys = example_tile_only()
    for k in range(1, 10):
        assert frak_n(sys, k) == k


def test_frak_n_matches_reference():
    for sys in (example_1(normalized=True), example_2(normalized=True)):
        for k in range(1, 30):
            assert frak_n(sys, k) == ref_frak_n(sys, k)


def test_frak_n_prefix_insufficient_horizon():
    sys = MoranSystem(2, SequenceSpec.prefix([4, 4, 4]), SequenceSpec.prefix([1, 1, 1]))
    with pytest.raises(HorizonError):
        frak_n(sys, 1)


def test_alpha_bound_golden():
    assert alpha_bound(example_1(normalized=True), 20) == 1
    assert alpha_bound(example_2(normalized=True), 20) == 3
    assert alpha_bound(example_tile_only(), 10) == 0


# -- distinctness ----------------------------------------------------------


def test_distinctness_golden():
    assert isinstance(distinctness_check(example_1(normalized=True)), Distinct)
    assert isinstance(distinctness_check(example_tile_only()), Distinct)
    res = distinctness_check(
        MoranSystem(2, SequenceSpec.periodic([2]), SequenceSpec.periodic([1, 2]))
    )
    assert res == Collision(1, 2)


def test_distinctness_zero_drift_always_collides():
    # b has no factor of N at all, so s is eventually periodic
    sys = MoranSystem(2, SequenceSpec.periodic([3]), SequenceSpec.periodic([1]))
    assert isinstance(distinctness_check(sys), Collision)


def test_distinctness_agrees_with_pairwise_scan():
    rng = random.Random(2024)
    for _ in range(40):
        N = rng.choice([2, 3])
        b = SequenceSpec.periodic(
            [rng.choice([2, 3, 4, 6, 9, 12, 18]) for _ in range(rng.randint(1, 3))],
            preperiod=[rng.choice([2, 4, 6])] * rng.randint(0, 1),
        )
        t = SequenceSpec.periodic([rng.randint(1, 18) for _ in range(rng.randint(1, 2))])
        sys = MoranSystem(N, b, t)
        res = distinctness_check(sys)
        vals = {}
        brute = None
        for k in range(1, 501):
            v = ref_s(sys, k)
            if v in vals:
                brute = (vals[v], k)
                break
            vals[v] = k
        if isinstance(res, Collision):
            assert brute == (res.i, res.j)
        else:
            assert brute is None


# -- case classification ---------------------------------------------------


def test_case_classify_golden():
    res1 = case_classify(example_1(normalized=True), window=20)
    assert isinstance(res1, CaseI)
    assert res1.breakpoints[:6] == (2, 4, 6, 8, 10, 12)
    res2 = case_classify(example_2(normalized=True))
    assert res2 == CaseII(k0=1, window=res2.window)
    res3 = case_classify(
        MoranSystem(2, SequenceSpec.periodic([4]), SequenceSpec.periodic([1])), window=10
    )
    assert isinstance(res3, CaseI)
    assert res3.breakpoints == tuple(range(1, res3.window + 1))


def test_case_classify_requires_distinctness():
    sys = MoranSystem(2, SequenceSpec.periodic([2]), SequenceSpec.periodic([1, 2]))
    with pytest.raises(PreconditionError):
        case_classify(sys)


def test_case_classify_prefix_undetermined():
    sys = MoranSystem(2, SequenceSpec.prefix([4, 4]), SequenceSpec.prefix([1, 1]))
    assert isinstance(case_classify(sys), Undetermined)


# -- existence -------------------------------------------------------------


def test_existence_converges_golden():
    res = existence_check(
        SequenceSpec.periodic([2]),
        SequenceSpec.periodic([1, 4]),
        SequenceSpec.periodic([18]),
        depth=8,
    )
    assert isinstance(res, Converges)
    res2 = existence_check(
        SequenceSpec.periodic([3]),
        SequenceSpec.periodic([1]),
        SequenceSpec.periodic([3]),
        depth=5,
    )
    assert isinstance(res2, Converges)
    # sum of 3 * 3^-k
    assert res2.partial_sum + res2.tail_bound == Fraction(3, 2)


def test_existence_tail_bound_is_exact_remaining_sum():
    N_s = SequenceSpec.periodic([2])
    t_s = SequenceSpec.periodic([3, 5], preperiod=[7])
    b_s = SequenceSpec.periodic([6, 4], preperiod=[2])
    shallow = existence_check(N_s, t_s, b_s, depth=3)
    deep = existence_check(N_s, t_s, b_s, depth=40)
    assert shallow.partial_sum <= deep.partial_sum
    assert shallow.partial_sum + shallow.tail_bound == deep.partial_sum + deep.tail_bound
    assert deep.tail_bound >= 0


def test_existence_unknown_for_prefix():
    # t_k = 9 * 18^(k-1): every term equals 1, partial sums = depth
    t_entries = [9 * 18**i for i in range(20)]
    res = existence_check(
        SequenceSpec.periodic([2]),
        SequenceSpec.prefix(t_entries),
        SequenceSpec.periodic([18]),
        depth=20,
    )
    assert res == Unknown(Fraction(20), 20)


def test_existence_diverges_without_decay():
    res = existence_check(
        SequenceSpec.periodic([2]),
        SequenceSpec.periodic([3]),
        SequenceSpec.periodic([1, -1]),
        depth=4,
    )
    assert isinstance(res, Diverges)


# -- three-series diagnostic ----------------------------------------------


def ref_component_measure(Nk, tk, B, r=Fraction(1)):
    """Atoms of delta_{D_k / B} with the outside-the-ball mass relocated to 0."""
    atoms = [Fraction(d * tk, B) for d in range(Nk)]
    inside = [a for a in atoms if abs(a) <= r]
    outside_mass = Fraction(len(atoms) - len(inside), Nk)
    mean = sum(inside, Fraction(0)) / Nk
    second = sum((a * a for a in inside), Fraction(0)) / Nk
    return outside_mass, mean, second - mean * mean


@pytest.mark.parametrize(
    "N,t,b,k_max",
    [(2, [1], [4], 3), (2, [1], [2], 1), (5, [1], [2], 4), (3, [2, 7], [6, 3], 5)],
)
def test_jessen_wintner_matches_atom_enumeration(N, t, b, k_max):
    N_s = SequenceSpec.periodic([N])
    t_s = SequenceSpec.periodic(t)
    b_s = SequenceSpec.periodic(b)
    S1, S2, S3 = jessen_wintner_series(N_s, t_s, b_s, k_max)
    e1 = e2 = e3 = Fraction(0)
    B = 1
    for k in range(1, k_max + 1):
        B *= b_s.entry(k)
        o, c, v = ref_component_measure(N, t_s.entry(k), B)
        e1 += o
        e2 += c
        e3 += v
    assert (S1, S2, S3) == (e1, e2, e3)


def test_jessen_wintner_golden():
    S1, S2, S3 = jessen_wintner_series(
        SequenceSpec.periodic([2]),
        SequenceSpec.periodic([1]),
        SequenceSpec.periodic([4]),
        3,
    )
    assert S1 == 0
    assert S2 == Fraction(21, 128)
    assert jessen_wintner_series(
        SequenceSpec.periodic([2]),
        SequenceSpec.periodic([1]),
        SequenceSpec.periodic([4]),
        0,
    ) == (0, 0, 0)
    # truncation branch: N=2, b=2 keeps both atoms inside the unit ball at k=1
    S1b, _, _ = jessen_wintner_series(
        SequenceSpec.periodic([2]),
        SequenceSpec.periodic([1]),
        SequenceSpec.periodic([2]),
        1,
    )
    assert S1b == 0
    # a genuinely truncated case: N=5, b=2, t=1 drops atoms 3/2 and 2 at k=1
    S1c, _, _ = jessen_wintner_series(
        SequenceSpec.periodic([5]),
        SequenceSpec.periodic([1]),
        SequenceSpec.periodic([2]),
        1,
    )
    assert S1c == Fraction(2, 5)


def test_jessen_wintner_rejects_signed():
    with pytest.raises(UnsupportedCaseError):
        jessen_wintner_series(
            SequenceSpec.periodic([2]),
            SequenceSpec.periodic([-1]),
            SequenceSpec.periodic([4]),
            2,
        )


# -- normalize -------------------------------------------------------------


def test_normalize_golden():
    ex2n, m2 = normalize(example_2())
    assert m2 == 3
    assert ex2n.b.entry(1) == 144
    assert ex2n.b.entry(2) == 18
    ex1n, m1 = normalize(example_1())
    assert m1 == 1
    assert ex1n.b.entry(1) == 36
    sys = example_tile_only()
    same, m0 = normalize(sys)
    assert m0 == 0
    assert same.b == sys.b


def test_normalize_shifts_s_uniformly():
    for raw in (example_1(), example_2()):
        norm, m = normalize(raw)
        for k in range(1, 40):
            assert s_value(norm, k) == s_value(raw, k) + m
        assert min(s_value(norm, k) for k in range(1, 40)) >= 0
        assert norm.is_normalized()


def test_normalize_rejects_signed():
    sys = MoranSystem(2, SequenceSpec.periodic([-18]), SequenceSpec.periodic([1]))
    with pytest.raises(UnsupportedCaseError):
        normalize(sys)


# -- growth hypothesis -----------------------------------------------------


def test_hypothesis_golden():
    assert spectral_hypothesis_check(example_2()) == Satisfied(1)
    assert spectral_hypothesis_check(example_tile_only()) == Violated(2)
    sys = MoranSystem(2, SequenceSpec.periodic([4]), SequenceSpec.periodic([1]))
    assert spectral_hypothesis_check(sys) == Satisfied(1)


def test_hypothesis_preperiod_violation_gives_m0():
    sys = MoranSystem(
        2, SequenceSpec.periodic([18], preperiod=[2]), SequenceSpec.periodic([4, 1])
    )
    assert spectral_hypothesis_check(sys) == Satisfied(2)
    assert hypothesis_holds_from(sys, 1) == 1
    assert hypothesis_holds_from(sys, 2) is None


def test_default_window_reasonable():
    assert default_window(example_1()) >= 12
    sys = MoranSystem(2, SequenceSpec.prefix([4, 4]), SequenceSpec.prefix([1, 1]))
    assert default_window(sys) == 2
