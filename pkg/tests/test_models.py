import math

import numpy as np
import pytest

from treeshift import (
    AtomicMeasure,
    BranchData,
    CERTIFIED,
    CONDITIONAL,
    REFUTED,
    RefutedSequenceError,
    WeightedShift,
    branch_data_from_json,
    certify_bilateral,
    certify_t_eta_kappa,
    certify_unilateral,
    check_stieltjes,
    extract_branch_data,
    make_family,
    product_moments,
    quadrature_from_moments,
    root_measure_equivalence_check,
    two_sided_from_weights,
)
from treeshift.models import trunk_conditions, verify_branch_moments

from conftest import stratified_atoms


# -- unilateral -----------------------------------------------------------------


def test_unilateral_isometry_certified():
    cert = certify_unilateral([1.0] * 10)
    assert cert.status == CERTIFIED
    assert cert.detail["representing_measure"]["atoms"][0]["x"] == pytest.approx(1.0)
    assert cert.detail["eps_root"] == 0.0


def test_unilateral_sqrt_weights_certified():
    cert = certify_unilateral([math.sqrt(n) for n in range(1, 11)])
    assert cert.status == CERTIFIED
    seq = cert.detail["sequence"]
    assert seq[:5] == pytest.approx([1.0, 1.0, 2.0, 6.0, 24.0], rel=1e-12)
    assert check_stieltjes(seq).consistent
    inner = cert.system_certificate
    assert inner is not None and inner.status == CERTIFIED


def test_unilateral_refuted_with_witness():
    cert = certify_unilateral([1.0, math.sqrt(0.5), 1.0, 1.0])
    assert cert.status == REFUTED
    assert cert.witness["check"] == "hankel"
    assert cert.witness["quadratic_form"] < 0


def test_unilateral_zero_weight_falls_back():
    # a zero first weight makes every later product vanish: the point-mass
    # sequences pass the necessary tests, so the verdict stays conditional
    cert = certify_unilateral([0.0, 1.0, 1.0, 1.0])
    assert cert.status == CONDITIONAL
    assert "necessary" in cert.detail["note"]
    # a zero in the middle refutes outright: {1, 1, 0, 0, ...} at the origin
    cert2 = certify_unilateral([1.0, 0.0, 1.0, 1.0])
    assert cert2.status == REFUTED


def test_unilateral_matches_general_certifier_on_random_weights(rng):
    for _ in range(20):
        n = int(rng.integers(6, 12))
        weights = rng.uniform(0.4, 1.6, size=n).tolist()
        cert = certify_unilateral(weights)
        seq = product_moments(weights)
        hankel_ok = check_stieltjes(seq).consistent
        if not hankel_ok:
            assert cert.status == REFUTED
            continue
        assert cert.status == CERTIFIED
        assert cert.system_certificate.status == CERTIFIED


# -- bilateral -------------------------------------------------------------------


def test_two_sided_sequence_values():
    weights = {k: math.sqrt(2) for k in range(-3, 4)}
    seq = two_sided_from_weights(weights)
    for n in range(seq.k_min, seq.k_max + 1):
        assert seq.value(n) == pytest.approx(2.0**n)
    assert seq.left_shift(2)[0] == pytest.approx(0.25)


def test_bilateral_doubling_certified_across_shifts():
    weights = {k: math.sqrt(2) for k in range(-8, 9)}
    cert = certify_bilateral(weights)
    assert cert.status == CERTIFIED
    assert set(int(k) for k in cert.stieltjes) >= set(range(9))
    assert all(v.consistent for v in cert.stieltjes.values())
    measure = cert.detail["representing_measure"]["atoms"]
    assert measure[0]["x"] == pytest.approx(2.0, rel=1e-9)


def test_bilateral_refuted_names_shift():
    weights = {k: math.sqrt(2) for k in range(-4, 5)}
    weights[-2] = 5.0  # breaks positivity of a shifted block
    cert = certify_bilateral(weights)
    assert cert.status == REFUTED
    assert "shift" in cert.witness
    assert cert.witness["quadratic_form"] < 0


def test_bilateral_zero_weight_rejected():
    weights = {k: 1.0 for k in range(-2, 3)}
    weights[0] = 0.0
    with pytest.raises(ValueError, match="nonzero"):
        certify_bilateral(weights)


def test_bilateral_pass_propagates_down_the_window(rng):
    # a representing measure at the window root walks down through the
    # single-child inversion and represents every later vertex's sequence
    from treeshift import child_from_parent_single

    weights = {k: math.sqrt(2) for k in range(-6, 7)}
    seq = two_sided_from_weights(weights)
    root = seq.k_min
    base_values = seq.left_shift(-root)
    usable = 2 * (len(base_values) // 2)
    rho = quadrature_from_moments(base_values[:usable]).measure
    rho = rho.scaled(1.0 / rho.total_mass)
    tree = make_family("bilateral-window", depth=6, back=-root)
    shift = WeightedShift(tree, {v: weights[v] for v in tree.non_root_vertices})
    current = rho
    for k in range(root, 4):
        n_max = min(4, 6 - k)
        expect = [shift.power_norm_sq(k, n) for n in range(n_max + 1)]
        got = current.moments(n_max)
        for a, b in zip(got, expect):
            assert a == pytest.approx(b, rel=1e-8)
        current = child_from_parent_single(shift, k, current)


# -- one branching vertex -----------------------------------------------------


def worked_branch_data(entry_sq=0.5):
    return BranchData(
        eta=2,
        kappa=0,
        branch_measures=(AtomicMeasure.delta(1.0), AtomicMeasure.delta(2.0)),
        entry_weights=(math.sqrt(entry_sq), math.sqrt(entry_sq)),
        branch_weights=((1.0,) * 7, (math.sqrt(2),) * 7),
    )


def test_rooted_branching_vertex_worked_example():
    cert = certify_t_eta_kappa(worked_branch_data(), depth=8)
    assert cert.status == CERTIFIED
    assert cert.detail["eps"]["0"] == pytest.approx(0.25, abs=1e-12)
    assert cert.detail["condition"]["sum"] == pytest.approx(0.75)
    doubled = certify_t_eta_kappa(worked_branch_data(entry_sq=1.0), depth=8)
    assert doubled.status == REFUTED
    assert doubled.witness["value"] == pytest.approx(1.5)


def test_branch_moment_hypothesis_is_enforced():
    bad = BranchData(
        eta=2,
        kappa=0,
        branch_measures=(AtomicMeasure.delta(1.0), AtomicMeasure.delta(2.0)),
        entry_weights=(0.5, 0.5),
        branch_weights=((1.0,) * 4, (1.0,) * 4),  # second branch lies
    )
    with pytest.raises(ValueError, match="do not represent"):
        certify_t_eta_kappa(bad, depth=5)
    report = verify_branch_moments(bad)
    assert not report["ok"]


def random_branch_data(rng, eta, kappa, passing=True):
    """Random instance with two-atom branch measures; when ``passing``, the
    entry and trunk weights are solved so the trunk equalities hold and the
    terminal level sits at a random value at most one."""
    measures = tuple(stratified_atoms(rng, 2, lo=0.3, hi=6.0, mass_lo=0.2) for _ in range(eta))
    measures = tuple(m.scaled(1.0 / m.total_mass) for m in measures)
    if passing:
        shares = rng.dirichlet(np.ones(eta))
        entry = tuple(
            math.sqrt(share / m.moment(-1)) for share, m in zip(shares, measures)
        )
    else:
        entry = tuple(rng.uniform(0.4, 1.2) for _ in range(eta))
    data = BranchData(
        eta=eta,
        kappa=0,
        branch_measures=measures,
        entry_weights=entry,
    )
    trunk = []
    for level in range(1, kappa + 1):
        inv_sum = math.fsum(
            data.entry_mod_sq(i) * measures[i].moment(-(level + 1))
            for i in range(eta)
        )
        prod_so_far = math.fsum([0.0]) if not trunk else None
        prev = 1.0
        for w in trunk:
            prev *= abs(w) ** 2
        if level < kappa:
            target = 1.0
        else:
            target = rng.uniform(0.55, 1.0)
        if passing:
            w_sq = target / (inv_sum * prev)
        else:
            w_sq = rng.uniform(0.3, 1.5)
        trunk.append(math.sqrt(w_sq))
    return BranchData(
        eta=eta,
        kappa=kappa,
        branch_measures=measures,
        entry_weights=entry,
        trunk_weights=tuple(trunk),
    )


def test_finite_trunk_solved_instances_certify(rng):
    for kappa in (1, 2):
        for _ in range(5):
            data = random_branch_data(rng, eta=2, kappa=kappa, passing=True)
            cert = certify_t_eta_kappa(data, depth=5)
            assert cert.status == CERTIFIED, cert.witness
            eps = cert.detail["eps"]
            allowed = {str(-kappa)}
            assert set(eps) <= allowed


def test_trunk_root_equivalence_on_random_instances(rng):
    disagreements = 0
    for _ in range(100):
        eta = int(rng.integers(2, 4))
        kappa = int(rng.integers(1, 3))
        passing = rng.random() < 0.5
        data = random_branch_data(rng, eta=eta, kappa=kappa, passing=passing)
        report = root_measure_equivalence_check(data)
        if not report["agree"]:
            disagreements += 1
        if passing:
            assert report["trunk_form"]["ok"]
    assert disagreements == 0


def test_equivalence_check_exact_for_delta_branches():
    data = BranchData(
        eta=2,
        kappa=1,
        branch_measures=(AtomicMeasure.delta(1.0), AtomicMeasure.delta(4.0)),
        entry_weights=(math.sqrt(0.5), math.sqrt(2.0)),
        trunk_weights=(math.sqrt(1.0 / (0.5 * 1.0 + 2.0 * 0.0625)),),
    )
    report = root_measure_equivalence_check(data)
    assert report["agree"]
    assert report["trunk_form"]["ok"] == report["measure_form"]["ok"]


def test_infinite_trunk_windowed_conditions(rng):
    # build a passing windowed instance: every level equality solved
    eta = 2
    window = 4
    measures = tuple(stratified_atoms(rng, 2, lo=0.4, hi=5.0, mass_lo=0.3) for _ in range(eta))
    measures = tuple(m.scaled(1.0 / m.total_mass) for m in measures)
    shares = rng.dirichlet(np.ones(eta))
    entry = tuple(math.sqrt(s / m.moment(-1)) for s, m in zip(shares, measures))
    trunk = []
    prod = 1.0
    base = BranchData(
        eta=eta, kappa=0, branch_measures=measures, entry_weights=entry
    )
    for level in range(1, window + 1):
        inv_sum = math.fsum(
            base.entry_mod_sq(i) * measures[i].moment(-(level + 1))
            for i in range(eta)
        )
        w_sq = 1.0 / (inv_sum * prod)
        trunk.append(math.sqrt(w_sq))
        prod *= w_sq
    data = BranchData(
        eta=eta,
        kappa="inf",
        branch_measures=measures,
        entry_weights=entry,
        trunk_weights=tuple(trunk),
    )
    cond = trunk_conditions(data)
    assert cond["ok"] and cond["trunk"] == "windowed"
    cert = certify_t_eta_kappa(data, depth=window)
    assert cert.status == CERTIFIED
    assert all(v == 0.0 for v in cert.detail["eps"].values())


def test_certified_instances_cross_validate_at_every_vertex(rng):
    data = random_branch_data(rng, eta=3, kappa=2, passing=True)
    cert = certify_t_eta_kappa(data, depth=5)
    assert cert.status == CERTIFIED
    inner = cert.system_certificate
    assert inner.status == CERTIFIED
    assert all(r.ok for r in inner.consistency)
    assert all(r.ok for r in inner.moments)


def test_branch_json_roundtrip_and_quadrature_route():
    data = worked_branch_data()
    doc = data.as_dict()
    back = branch_data_from_json(doc)
    assert back.eta == 2 and back.kappa == 0
    assert back.branch_measures[1].atoms == ((2.0, 1.0),)
    weights_only = {
        "eta": 2,
        "kappa": 0,
        "branch_weights": [[1.0] * 7, [math.sqrt(2)] * 7],
        "entry_weights": [math.sqrt(0.5), math.sqrt(0.5)],
    }
    derived = branch_data_from_json(weights_only)
    assert derived.branch_measures[0].atoms[0][0] == pytest.approx(1.0)
    assert derived.branch_measures[1].atoms[0][0] == pytest.approx(2.0, rel=1e-9)


# -- extraction -------------------------------------------------------------------


def branching_shift(eta=2, kappa=0, depth=6):
    tree = make_family("t-eta-kappa", depth, eta=eta, kappa=kappa)
    weights = {}
    for i in range(1, eta + 1):
        weights[(i, 1)] = math.sqrt(0.5)
        for j in range(2, depth + 1):
            weights[(i, j)] = 1.0 if i == 1 else math.sqrt(2)
    trunk_len = depth if kappa == math.inf else kappa
    for ell in range(trunk_len):
        weights[-ell] = 1.0
    return WeightedShift(tree, weights)


def test_extract_branch_data_recovers_measures():
    shift = branching_shift()
    seqs = {
        0: shift.moment_values(0, 6),
        (1, 1): shift.moment_values((1, 1), 5),
        (2, 1): shift.moment_values((2, 1), 5),
    }
    ext = extract_branch_data(shift, seqs)
    assert ext.status == CONDITIONAL
    assert ext.conditions["condition"]["ok"]
    m1, m2 = ext.data.branch_measures
    assert m1.atoms[0][0] == pytest.approx(1.0, rel=1e-9)
    assert m2.atoms[0][0] == pytest.approx(2.0, rel=1e-9)
    assert ext.diagnostic.label == "divergence-trend"


def test_extract_fast_growth_stays_conditional():
    # branch products growing like (2n)!^2 push the diagnostic to convergence
    depth = 8
    tree = make_family("t-eta-kappa", depth, eta=2, kappa=0)
    seq = [float(math.factorial(2 * n)) ** 2 for n in range(depth + 1)]
    weights = {}
    for i in (1, 2):
        weights[(i, 1)] = math.sqrt(0.5)
        for j in range(2, depth + 1):
            weights[(i, j)] = math.sqrt(seq[j - 1] / seq[j - 2])
    shift = WeightedShift(tree, weights)
    seqs = {
        0: shift.moment_values(0, depth),
        (1, 1): shift.moment_values((1, 1), depth - 1),
        (2, 1): shift.moment_values((2, 1), depth - 1),
    }
    ext = extract_branch_data(shift, seqs)
    assert ext.status == CONDITIONAL
    assert ext.diagnostic.label == "convergence-trend"
    assert any("conditional" in n for n in ext.notes)


def test_extract_rejects_refuted_sequences():
    shift = branching_shift()
    seqs = {
        0: shift.moment_values(0, 6),
        (1, 1): (1.0, 1.0, 0.0, 0.0),
        (2, 1): shift.moment_values((2, 1), 5),
    }
    with pytest.raises(RefutedSequenceError):
        extract_branch_data(shift, seqs)


def test_extract_finite_trunk_checks_root_measure_form():
    # entry weights solved against point masses at 1 and 4 so the
    # branching-vertex equality holds, with slack at the terminal level
    depth = 6
    tree = make_family("t-eta-kappa", depth, eta=2, kappa=1)
    weights = {(1, 1): math.sqrt(0.5), (2, 1): math.sqrt(2.0), 0: math.sqrt(1.28)}
    for j in range(2, depth + 1):
        weights[(1, j)] = 1.0
        weights[(2, j)] = 2.0
    shift = WeightedShift(tree, weights)
    seqs = {
        -1: shift.moment_values(-1, 6),
        0: shift.moment_values(0, 6),
        (1, 1): shift.moment_values((1, 1), 5),
        (2, 1): shift.moment_values((2, 1), 5),
    }
    ext = extract_branch_data(shift, seqs)
    assert ext.status == CONDITIONAL
    assert ext.conditions["condition"]["ok"]
    assert ext.conditions["root_measure_form"]["ok"]
    m1, m2 = ext.data.branch_measures
    assert m1.atoms[0][0] == pytest.approx(1.0, rel=1e-9)
    assert m2.atoms[0][0] == pytest.approx(4.0, rel=1e-9)
