"""Acceptance suite: every exit criterion at its stated grid and tolerance.

Each test prints one `ACCEPTANCE <nn> <name>: PASS/FAIL` line (visible with
``pytest -s``; ``pytest -v`` shows the same verdicts as test outcomes).
Exact-rational checks carry zero tolerance; only the Monte-Carlo criterion
has a stated numeric slack.
"""

from fractions import Fraction
from functools import lru_cache
from math import comb
from random import Random

from privset.auditor import (
    audit_accuracy,
    audit_privacy,
    audit_testing_accuracy,
    audit_testing_privacy,
    canonical_pair,
    mc_estimate_delta,
)
from privset.bounds import (
    lower_bound_any,
    lower_bound_independent,
    upper_bound_sphere,
    upper_bound_union,
)
from privset.cli import main as cli_main
from privset.combinatorics import (
    Subset,
    distance,
    enumerate_excess_set,
    enumerate_subsets,
    incidence_count,
)
from privset.grouptesting import (
    NoiseBefore,
    Noiseless,
    bernoulli_design,
    identity_design,
    induced_overwrites,
    run_tests,
)
from privset.mechanisms import (
    BallMechanism,
    SphereMechanism,
    UniformMechanism,
    UnionMechanism,
    clamp_to_accuracy,
    make_mechanism,
    resize_outcomes,
)


def _verdict(num: int, name: str, failures: list[str]) -> None:
    status = "PASS" if not failures else f"FAIL ({len(failures)} violations)"
    print(f"ACCEPTANCE {num:02d} {name}: {status}")
    assert not failures, f"criterion {num} ({name}): first violations: {failures[:5]}"


def grid_main():
    """4 <= n <= 9, 1 <= d <= n-1, 1 <= beta <= min(d, n-d), beta^2 <= n."""
    for n in range(4, 10):
        for d in range(1, n):
            for beta in range(1, min(d, n - d) + 1):
                if beta * beta <= n:
                    yield n, d, beta


def grid_union():
    """n <= 12, d >= 1, beta >= 1, d + beta < n."""
    for n in range(3, 13):
        for d in range(1, n - 1):
            for beta in range(1, n - d):
                yield n, d, beta


@lru_cache(maxsize=None)
def union_delta_star(n: int, d: int, beta: int) -> Fraction:
    return audit_privacy(UnionMechanism(n, d, beta), 1).delta_star


def test_criterion_01_ball_sandwich():
    failures = []
    for n, d, beta in grid_main():
        lower = lower_bound_any(n, d, beta).value
        upper = upper_bound_sphere(n, d, beta).value
        audited = audit_privacy(BallMechanism(n, d, beta), 1).delta_star
        if not lower <= audited <= upper:
            failures.append(f"(n={n},d={d},beta={beta}): {lower} <= {audited} <= {upper}")
    _verdict(1, "ball audit sandwiched by closed-form bounds", failures)


def test_criterion_02_ball_spot_value():
    failures = []
    audited = audit_privacy(BallMechanism(6, 2, 1), 1).delta_star
    if audited != Fraction(1, 3):
        failures.append(f"ball delta* = {audited}, expected 1/3")
    if lower_bound_any(6, 2, 1).value != Fraction(1, 4):
        failures.append("lower bound != 1/4")
    if upper_bound_sphere(6, 2, 1).value != Fraction(3, 8):
        failures.append("upper bound != 3/8")
    if not Fraction(1, 4) <= audited <= Fraction(3, 8):
        failures.append("bounds do not bracket the audit")
    _verdict(2, "ball spot value 1/3 inside [1/4, 3/8]", failures)


def test_criterion_03_sphere_exceeds_claimed_level():
    # the sphere and ball readings of the same release rule audit differently;
    # the sphere variant strictly exceeds the claimed (d-b)(n-d-b)/(d(n-d)) level
    failures = []
    audited = audit_privacy(SphereMechanism(6, 2, 1), 1).delta_star
    if audited != Fraction(1, 2):
        failures.append(f"sphere delta* = {audited}, expected 1/2")
    if not audited > upper_bound_sphere(6, 2, 1).value:
        failures.append("sphere audit does not exceed 3/8")
    _verdict(3, "sphere/ball discrepancy exhibit (1/2 > 3/8)", failures)


def test_criterion_04_union_sandwich():
    failures = []
    for n, d, beta in grid_union():
        audited = union_delta_star(n, d, beta)
        if audited < lower_bound_independent(n, d, beta).value:
            failures.append(f"(n={n},d={d},beta={beta}): {audited} below floor")
        upper = upper_bound_union(n, d, beta)
        if upper.regime_ok and audited > upper.value:
            failures.append(f"(n={n},d={d},beta={beta}): {audited} above ceiling")
    spot = union_delta_star(6, 2, 1)
    if spot != Fraction(5, 6):
        failures.append(f"spot (6,2,1) = {spot}, expected 5/6")
    _verdict(4, "union audit sandwiched by independent-noise bounds", failures)


def test_criterion_05_accuracy_exactly_zero():
    failures = []
    for n, d, beta in grid_main():
        for m in (BallMechanism(n, d, beta), SphereMechanism(n, d, beta), UnionMechanism(n, d, beta)):
            eps1 = audit_accuracy(m).eps1_exact
            if eps1 != 0:
                failures.append(f"{m.kind} (n={n},d={d},beta={beta}): eps1 = {eps1}")
        gt = audit_testing_accuracy(identity_design(n), NoiseBefore(beta), n, d, beta)
        if gt.eps1_exact != 0:
            failures.append(f"gt pipeline (n={n},d={d},beta={beta}): eps1 = {gt.eps1_exact}")
    _verdict(5, "accuracy audits exactly zero on the main grid", failures)


def test_criterion_06_testing_transfer():
    failures = []
    for n, d, beta in grid_union():
        gt = audit_testing_privacy(identity_design(n), NoiseBefore(beta), n, d, 1).delta_star
        mech = union_delta_star(n, d, beta)
        if gt != mech:
            failures.append(f"(n={n},d={d},beta={beta}): syndrome {gt} != mechanism {mech}")
        upper = upper_bound_union(n, d, beta)
        if upper.regime_ok and gt > upper.value:
            failures.append(f"(n={n},d={d},beta={beta}): {gt} above ceiling")
    _verdict(6, "syndrome audit equals union-mechanism audit, fraction for fraction", failures)


def test_criterion_07_noiseless_pipeline_fails():
    failures = []
    for n in range(2, 9):
        for d in range(1, n):
            audited = audit_testing_privacy(identity_design(n), Noiseless(), n, d, 1).delta_star
            if audited != 1:
                failures.append(f"(n={n},d={d}): delta* = {audited}, expected 1")
    _verdict(7, "noiseless identity design leaks everything (delta* = 1)", failures)


def test_criterion_08_proof_identity_oracles():
    failures = []
    for n in range(2, 9):
        for d in range(1, n):
            top = min(d, n - d)
            e_i = Subset(n, tuple(range(d)))
            for beta in range(1, top + 1):
                # excess-set count, canonical neighbor pair plus a shifted one
                pairs = [canonical_pair(n, d)]
                if d >= 2:
                    pairs.append((Subset(n, tuple(range(1, d + 1))),
                                  Subset(n, tuple(range(2, d + 2)) if d + 1 < n else tuple(range(d - 1)) + (d,))))
                for a, b in pairs:
                    if distance(a, b) != 1:
                        continue
                    got = len(enumerate_excess_set(a, b, beta))
                    want = comb(d - 1, beta) * comb(n - d - 1, beta)
                    if got != want:
                        failures.append(f"excess (n={n},d={d},beta={beta}): {got} != {want}")
            for alpha in range(0, top + 1):
                e_l = Subset(n, tuple(range(alpha, d)) + tuple(range(d, d + alpha)))
                got = incidence_count("through", e_i, e_l, alpha)
                if got != (d - alpha) * (n - d - alpha):
                    failures.append(f"through (n={n},d={d},alpha={alpha}): {got}")
            for alpha in range(0, top):
                e_l = Subset(n, tuple(range(alpha + 1, d)) + tuple(range(d, d + alpha + 1)))
                got = incidence_count("middle", e_i, e_l, alpha)
                if got != (alpha + 1) ** 2:
                    failures.append(f"middle (n={n},d={d},alpha={alpha}): {got}")
            # union-release size marginal against the enumerated distribution
            for beta in range(1, n + 1):
                m = UnionMechanism(n, d, beta)
                by_alpha: dict[int, Fraction] = {}
                for s, p in m.output_distribution(e_i).items():
                    by_alpha[len(s) - d] = by_alpha.get(len(s) - d, Fraction(0)) + p
                for alpha in range(0, beta + 1):
                    if by_alpha.get(alpha, Fraction(0)) != m.size_marginal(alpha):
                        failures.append(f"size marginal (n={n},d={d},beta={beta},alpha={alpha})")
    _verdict(8, "counting identities match enumeration everywhere (n <= 8)", failures)


def test_criterion_09_before_after_coupling():
    failures = []
    for n in range(1, 6):
        designs = [identity_design(n)]
        if n >= 2:
            designs.append(bernoulli_design(n, 4, 0.5, Random(1000 + n)))
            designs.append(bernoulli_design(n, 7, 0.3, Random(2000 + n)))
        for design in designs:
            for e_mask in range(1 << n):
                e = Subset.from_mask(n, e_mask)
                for b_mask in range(1 << n):
                    b = Subset.from_mask(n, b_mask)
                    before = run_tests(design, e, b)
                    after = run_tests(design, e, induced_overwrites(design, b))
                    if before != after:
                        failures.append(f"n={n}, e={e.items}, B={b.items}")
    _verdict(9, "before-noise == induced after-noise, bit-exact (n <= 5)", failures)


def test_criterion_10_transformer_properties():
    failures = []
    # resize never increases distance: every possible inner output x every choice
    for n in range(2, 7):
        for d in range(1, n):
            for e in enumerate_subsets(n, d):
                for s_mask in range(1 << n):
                    s = Subset.from_mask(n, s_mask)
                    base = distance(s, e)
                    for r, _ in resize_outcomes(s, d):
                        if len(r) != d or distance(r, e) > base:
                            failures.append(f"n={n}, e={e.items}, s={s.items}, r={r.items}")
    for n, d, beta in [(6, 2, 1), (6, 2, 2), (5, 2, 1), (6, 3, 2)]:
        eps1 = audit_accuracy(clamp_to_accuracy(UniformMechanism(n, d, beta))).eps1_exact
        if eps1 != 0:
            failures.append(f"clamped uniform (n={n},d={d},beta={beta}): eps1 = {eps1}")
    _verdict(10, "resize never increases distance; clamp restores accuracy", failures)


def test_criterion_11_monte_carlo_consistency():
    failures = []
    samples = 200_000
    cases = [("a1ball", Fraction(1, 3), 101), ("a1sphere", Fraction(1, 2), 102), ("a2", Fraction(5, 6), 103)]
    for kind, exact, seed in cases:
        m = make_mechanism(kind, 6, 2, 1)
        report = mc_estimate_delta(m, canonical_pair(6, 2), 1.0, samples, Random(seed))
        err = abs(report.estimate - float(exact))
        if err > 0.02:
            failures.append(f"{kind}: |{report.estimate} - {float(exact)}| = {err:.4f} > 0.02")
    _verdict(11, "Monte-Carlo within 0.02 of exact at 2e5 samples", failures)


def test_criterion_12_cli_determinism(capsys, tmp_path):
    failures = []

    def run(*argv) -> str:
        code = cli_main(list(argv))
        out = capsys.readouterr().out
        if code != 0:
            failures.append(f"exit {code} for {argv}")
        return out

    audit_args = ("audit", "--mech", "a1ball", "--n", "6", "--d", "2", "--beta", "1",
                  "--format", "json")
    if run(*audit_args) != run(*audit_args):
        failures.append("audit JSON differs across runs")

    bounds_args = ("bounds", "--n", "8", "--d", "3", "--beta", "2", "--format", "json")
    if run(*bounds_args) != run(*bounds_args):
        failures.append("bounds JSON differs across runs")

    gt_args = ("gt", "--design", "identity", "--noise", "before", "--n", "6", "--d", "2",
               "--beta", "1", "--seed", "7", "--trials", "10")
    if run(*gt_args) != run(*gt_args):
        failures.append("gt CSV differs across runs")

    mc_args = ("audit", "--mech", "a2", "--n", "6", "--d", "2", "--beta", "1",
               "--mode", "mc", "--samples", "5000", "--seed", "11", "--format", "json")
    if run(*mc_args) != run(*mc_args):
        failures.append("mc audit JSON differs across runs")

    sweep_out = tmp_path / "sweep.csv"
    sweep_args = ("sweep", "--mech", "a1ball", "--n", "5:8", "--d", "2", "--beta", "1",
                  "--out", str(sweep_out))
    run(*sweep_args)
    first = sweep_out.read_bytes()
    run(*sweep_args)
    if sweep_out.read_bytes() != first:
        failures.append("sweep CSV differs across runs")

    _verdict(12, "identical seeded CLI invocations are byte-identical", failures)
