import math

import pytest

from treeshift import (
    AtomicMeasure,
    MeasureSystem,
    WeightedShift,
    check_stieltjes,
    convergence_report,
    make_family,
    truncate,
    truncated_path_weight,
    verify_truncated_consistency,
)

from conftest import random_consistent_system


def mixed_pair_system(positions=(1.0, 2.0), depth=4):
    tree = make_family("unilateral", depth)
    base = AtomicMeasure(((positions[0], 0.5), (positions[1], 0.5)))
    t = base.moments(depth + 1)
    shift = WeightedShift(
        tree, {n + 1: math.sqrt(t[n + 1] / t[n]) for n in range(depth)}
    )
    mu = {}
    current = base
    for n in range(depth + 1):
        mu[n] = current.scaled(1.0 / current.total_mass)
        current = current.times_power(1)
    return shift, MeasureSystem(mu=mu, eps={v: 0.0 for v in tree.sorted_vertices})


def test_truncation_identity_when_window_covers_support():
    shift, system = mixed_pair_system()
    entry = truncate(system, shift, 4)
    for v in shift.tree.non_root_vertices:
        assert entry.shift.weight(v) == shift.weight(v)
    for v in shift.tree.sorted_vertices:
        assert entry.system.mu[v].atoms == system.mu[v].atoms
        assert entry.system.eps_at(v) == system.eps_at(v)


def test_truncation_restricts_and_rescales():
    shift, system = mixed_pair_system(positions=(1.0, 3.0))
    entry = truncate(system, shift, 2)
    assert entry.system.mu[0].atoms == ((1.0, 1.0),)
    # weight rescaling by the window-mass ratio of endpoint over parent
    expected = shift.weight(1) * math.sqrt(
        system.mu[1].mass_upto(2) / system.mu[0].mass_upto(2)
    )
    assert entry.shift.weight(1) == pytest.approx(expected, rel=1e-15)
    report = verify_truncated_consistency(entry)
    assert report.ok
    assert report.max_support <= 2.0


def test_degenerate_window_branch():
    # all mass above the window: weight zero, unit point mass at zero
    tree = make_family("unilateral", 2)
    base = AtomicMeasure.delta(3.0)
    t = base.moments(3)
    shift = WeightedShift(tree, {1: math.sqrt(t[1]), 2: math.sqrt(t[2] / t[1])})
    mu = {0: base, 1: base, 2: base}
    system = MeasureSystem(mu=mu, eps={0: 0.0, 1: 0.0, 2: 0.0})
    entry = truncate(system, shift, 2)
    assert entry.shift.weight(1) == 0.0
    assert entry.system.mu[0].atoms == ((0.0, 1.0),)
    assert entry.system.eps_at(0) == 1.0
    assert verify_truncated_consistency(entry).ok


def test_truncated_path_weight_closed_form():
    shift, system = mixed_pair_system()
    entry = truncate(system, shift, 1)
    assert truncated_path_weight(entry, 0, 0) == 1.0
    got = truncated_path_weight(entry, 0, 1)
    want = shift.weight(1) * math.sqrt((1 / 3) / (1 / 2))
    assert got == pytest.approx(want, rel=1e-14)
    assert got == pytest.approx(entry.shift.path_weight(0, 1), rel=1e-14)
    with pytest.raises(ValueError, match="below the first massive window"):
        shift5, system5 = mixed_pair_system(positions=(3.0, 5.0))
        entry5 = truncate(system5, shift5, 2)
        truncated_path_weight(entry5, 0, 1)


def test_truncated_path_weight_matches_direct_on_random_systems(rng):
    for _ in range(15):
        shift, system = random_consistent_system(rng, max_vertices=25)
        tree = shift.tree
        for i in (2, 5, 11):
            entry = truncate(system, shift, i)
            for u in tree.sorted_vertices:
                if entry.kappas[u] > i:
                    continue
                for v in sorted(tree.descendants(u), key=str)[:6]:
                    closed = truncated_path_weight(entry, u, v)
                    direct = entry.shift.path_weight(u, v)
                    assert abs(closed - direct) <= 1e-12 * max(
                        1.0, abs(closed), abs(direct)
                    )


def test_every_truncation_of_consistent_system_verifies(rng):
    for _ in range(15):
        shift, system = random_consistent_system(rng, max_vertices=25)
        for i in (2, 4, 8, 16):
            entry = truncate(system, shift, i)
            report = verify_truncated_consistency(entry)
            assert report.ok, (i, report.as_dict())
            assert report.max_support <= i
            assert report.norm_bound <= i + 1e-9


def test_truncated_norm_equals_windowed_moment(rng):
    # |S_trunc^n e_u|^2 = window moment of the original measure, normalized
    for _ in range(10):
        shift, system = random_consistent_system(rng, max_vertices=20)
        tree = shift.tree
        for i in (3, 7):
            entry = truncate(system, shift, i)
            for u in tree.sorted_vertices:
                mass = system.mu[u].mass_upto(i)
                if mass == 0.0:
                    continue
                avail = int(min(3, tree.available_depth(u)))
                for n in range(avail + 1):
                    windowed = (
                        math.fsum(
                            w * x**n for x, w in system.mu[u].atoms if x <= i
                        )
                        / mass
                    )
                    got = entry.shift.power_norm_sq(u, n)
                    assert got == pytest.approx(windowed, rel=1e-9, abs=1e-12)


def test_truncations_pass_bounded_hankel_everywhere(rng):
    for _ in range(8):
        shift, system = random_consistent_system(rng, max_vertices=20)
        entry = truncate(system, shift, 4)
        tree = shift.tree
        for u in tree.sorted_vertices:
            avail = int(min(6, tree.available_depth(u)))
            if avail < 2:
                continue
            assert check_stieltjes(entry.shift.moment_values(u, avail)).consistent


def test_hand_perturbed_entry_fails():
    shift, system = mixed_pair_system()
    entry = truncate(system, shift, 4)
    tampered_weights = dict(entry.shift.weights)
    tampered_weights[2] = tampered_weights[2] * 1.05
    from treeshift import TruncationEntry

    bad = TruncationEntry(
        index=entry.index,
        shift=WeightedShift(entry.shift.tree, tampered_weights),
        system=entry.system,
        original_shift=entry.original_shift,
        original_system=entry.original_system,
        kappas=entry.kappas,
        window_mass=entry.window_mass,
    )
    report = verify_truncated_consistency(bad)
    assert not report.ok
    failing = [r for r in report.consistency if not r.ok]
    assert failing and failing[0].vertex == 1


def test_weights_converge_to_originals(rng):
    for _ in range(10):
        shift, system = random_consistent_system(rng, max_vertices=20)
        residuals = []
        for i in (2, 4, 8, 16):
            entry = truncate(system, shift, i)
            residuals.append(
                max(
                    abs(entry.shift.weight(v) - shift.weight(v))
                    for v in shift.tree.non_root_vertices
                )
            )
        assert residuals[-1] <= 1e-12  # supports end below 10 < 16
        assert all(
            b <= a + 1e-12 for a, b in zip(residuals, residuals[1:])
        )


def test_convergence_report_mixed_support():
    shift, system = mixed_pair_system(positions=(1.0, 3.0))
    table = convergence_report(system, shift, 0, 2, [1, 2, 3])
    residuals = [r.residual_sq for r in table.rows]
    assert residuals[0] >= residuals[1] >= residuals[2]
    assert residuals[2] == 0.0
    assert table.original_norm_sq == pytest.approx(system.mu[0].moment(2))
    text = table.as_text()
    assert "residual_sq" in text and str(table.power) in text


def test_cross_inner_product_closed_form(rng):
    # <S^n e_u, S_trunc^n e_u> equals the window-mass weighted sum
    # (1/sqrt(m_u)) * sum |path weight|^2 sqrt(m_w) once the window has mass
    for _ in range(10):
        shift, system = random_consistent_system(rng, max_vertices=20)
        tree = shift.tree
        u = tree.root
        if tree.available_depth(u) < 2:
            continue
        for i in (3, 6):
            entry = truncate(system, shift, i)
            if entry.kappas[u] > i:
                continue
            table = convergence_report(system, shift, u, 2, [i])
            m_u = entry.window_mass[u]
            closed = math.fsum(
                abs(shift.path_weight(u, w)) ** 2
                * math.sqrt(entry.window_mass[w])
                for w in sorted(tree.children_n(u, 2), key=str)
            ) / math.sqrt(m_u)
            got = table.rows[0].cross_inner.real
            assert got == pytest.approx(closed, rel=1e-11, abs=1e-12)


def test_convergence_residuals_decay_on_spread_system(rng):
    tree = make_family("unilateral", 3)
    base = AtomicMeasure(tuple((float(x), 1 / 8) for x in range(1, 9)))
    t = base.moments(4)
    shift = WeightedShift(tree, {n + 1: math.sqrt(t[n + 1] / t[n]) for n in range(3)})
    mu = {}
    current = base
    for n in range(4):
        mu[n] = current.scaled(1.0 / current.total_mass)
        current = current.times_power(1)
    system = MeasureSystem(mu=mu, eps={v: 0.0 for v in tree.sorted_vertices})
    table = convergence_report(system, shift, 0, 2, [2, 4, 8])
    residuals = [r.residual_sq for r in table.rows]
    assert residuals[0] > residuals[1] > residuals[2]
    assert residuals[2] == 0.0
