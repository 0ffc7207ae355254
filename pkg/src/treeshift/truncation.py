"""Bounded truncations of a consistent system.

For a window height i, every measure is conditioned on [0, i], every weight
is rescaled by the square root of the child/parent window-mass ratio (zero
when the parent window is empty), and the zero masses are renormalized.
Each truncation again satisfies the consistency identity, has supports
inside [0, i], and converges back to the original shift as i grows; the
convergence report tabulates that decay.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .consistency import MeasureSystem, check_consistency_at
from .moments import AtomicMeasure, check_stieltjes
from .shift import WeightedShift, _fsum_complex
from .tree import vertex_sort_key, vertex_to_key


@dataclass(frozen=True, eq=False)
class TruncationEntry:
    """One member of the truncation family.

    ``kappas`` holds, per vertex, the smallest window height with positive
    mass; formulas conditioned on the window (the closed-form path weights,
    the norm identity) require the index to be at least that height.
    """

    index: int
    shift: WeightedShift
    system: MeasureSystem
    original_shift: WeightedShift
    original_system: MeasureSystem
    kappas: dict
    window_mass: dict

    def as_dict(self) -> dict:
        return {
            "index": self.index,
            "weights": {
                vertex_to_key(v): {"re": w.real, "im": w.imag}
                for v, w in sorted(
                    self.shift.weights.items(), key=lambda kv: vertex_sort_key(kv[0])
                )
            },
            "system": self.system.as_dict(),
            "kappas": {
                vertex_to_key(v): self.kappas[v]
                for v in sorted(self.kappas, key=vertex_sort_key)
            },
            "window_mass": {
                vertex_to_key(v): self.window_mass[v]
                for v in sorted(self.window_mass, key=vertex_sort_key)
            },
        }


def _kappa(mu: AtomicMeasure) -> int:
    """Smallest positive integer window [0, i] carrying positive mass."""
    if not mu.atoms:
        return 1
    first = mu.atoms[0][0]
    return max(1, math.ceil(first))


def truncate(system: MeasureSystem, shift: WeightedShift, i: int) -> TruncationEntry:
    """Build the window-i member of the truncation family."""
    if i < 1:
        raise ValueError("window height must be a positive integer")
    tree = shift.tree
    mass = {v: system.measure(v).mass_upto(i) for v in tree.sorted_vertices}
    kappas = {v: _kappa(system.measure(v)) for v in tree.sorted_vertices}
    if all(system.measure(v).max_position() <= i for v in tree.sorted_vertices):
        # the window swallows every support: the truncation is the identity
        return TruncationEntry(
            index=i,
            shift=shift,
            system=system,
            original_shift=shift,
            original_system=system,
            kappas=kappas,
            window_mass=mass,
        )
    new_weights = {}
    for v in sorted(tree.non_root_vertices, key=vertex_sort_key):
        parent_mass = mass[tree.parent[v]]
        if parent_mass > 0.0:
            new_weights[v] = shift.weight(v) * math.sqrt(mass[v] / parent_mass)
        else:
            new_weights[v] = complex(0.0)
    new_mu = {}
    new_eps = {}
    for v in tree.sorted_vertices:
        if mass[v] > 0.0:
            new_mu[v] = system.measure(v).restricted(i).scaled(1.0 / mass[v])
            new_eps[v] = system.eps_at(v) / mass[v]
        else:
            new_mu[v] = AtomicMeasure.delta(0.0)
            new_eps[v] = 1.0
    return TruncationEntry(
        index=i,
        shift=WeightedShift(tree, new_weights),
        system=MeasureSystem(mu=new_mu, eps=new_eps),
        original_shift=shift,
        original_system=system,
        kappas=kappas,
        window_mass=mass,
    )


@dataclass(frozen=True)
class TruncationReport:
    """Verification record for one truncation entry."""

    index: int
    ok: bool
    consistency: tuple
    supports_ok: bool
    max_support: float
    norm_bound: float
    norm_bound_ok: bool
    stieltjes_ok: bool
    stieltjes_failures: tuple

    def as_dict(self) -> dict:
        return {
            "index": self.index,
            "ok": self.ok,
            "consistency": [r.as_dict() for r in self.consistency],
            "supports_ok": self.supports_ok,
            "max_support": self.max_support,
            "norm_bound": self.norm_bound,
            "norm_bound_ok": self.norm_bound_ok,
            "stieltjes_ok": self.stieltjes_ok,
            "stieltjes_failures": [vertex_to_key(v) for v in self.stieltjes_failures],
        }


def verify_truncated_consistency(entry: TruncationEntry, tol: float = 1e-9) -> TruncationReport:
    """Check the truncated identity at every vertex, confirm all supports sit
    inside the window (hence the truncated shift is bounded with squared norm
    at most the window height), and run the bounded-case Hankel test on the
    truncated power norms at every vertex."""
    tree = entry.shift.tree
    reports = []
    ok = True
    for u in tree.sorted_vertices:
        if tree.available_depth(u) < 1:
            continue
        rep = check_consistency_at(entry.system, entry.shift, u, tol=tol)
        reports.append(rep)
        ok = ok and rep.ok
    max_support = max(
        (entry.system.measure(v).max_position() for v in tree.sorted_vertices),
        default=0.0,
    )
    supports_ok = max_support <= entry.index
    bound = entry.shift.norm_bound().value
    norm_bound_ok = bound <= entry.index + tol
    stieltjes_failures = []
    for u in tree.sorted_vertices:
        avail = tree.available_depth(u)
        top = int(min(avail, 8)) if avail != math.inf else 8
        if top < 2:
            continue
        values = entry.shift.moment_values(u, top)
        if not check_stieltjes(values, tol=tol).consistent:
            stieltjes_failures.append(u)
    stieltjes_ok = not stieltjes_failures
    return TruncationReport(
        index=entry.index,
        ok=ok and supports_ok and norm_bound_ok and stieltjes_ok,
        consistency=tuple(reports),
        supports_ok=supports_ok,
        max_support=max_support,
        norm_bound=bound,
        norm_bound_ok=norm_bound_ok,
        stieltjes_ok=stieltjes_ok,
        stieltjes_failures=tuple(stieltjes_failures),
    )


def truncated_path_weight(entry: TruncationEntry, u, v) -> complex:
    """Closed form for a truncated path weight: the original path weight
    scaled by the square root of the endpoint/base window-mass ratio.
    Requires the window to already carry mass at the base vertex."""
    if entry.index < entry.kappas[u]:
        raise ValueError(
            f"window {entry.index} is below the first massive window "
            f"{entry.kappas[u]} at {u!r}"
        )
    base = entry.window_mass[u]
    return entry.original_shift.path_weight(u, v) * math.sqrt(
        entry.window_mass[v] / base
    )


@dataclass(frozen=True)
class ConvergenceRow:
    index: int
    truncated_norm_sq: float
    cross_inner: complex
    residual_sq: float

    def as_dict(self) -> dict:
        return {
            "index": self.index,
            "truncated_norm_sq": self.truncated_norm_sq,
            "cross_re": self.cross_inner.real,
            "cross_im": self.cross_inner.imag,
            "residual_sq": self.residual_sq,
        }


@dataclass(frozen=True)
class ConvergenceTable:
    vertex: object
    power: int
    original_norm_sq: float
    rows: tuple

    def as_dict(self) -> dict:
        return {
            "vertex": vertex_to_key(self.vertex),
            "power": self.power,
            "original_norm_sq": self.original_norm_sq,
            "rows": [r.as_dict() for r in self.rows],
        }

    def as_text(self) -> str:
        lines = [
            f"vertex {vertex_to_key(self.vertex)}  power {self.power}  "
            f"|S^n e_u|^2 = {self.original_norm_sq:.12g}",
            f"{'i':>6} {'trunc_norm_sq':>18} {'cross_re':>18} {'residual_sq':>18}",
        ]
        for r in self.rows:
            lines.append(
                f"{r.index:>6} {r.truncated_norm_sq:>18.12g} "
                f"{r.cross_inner.real:>18.12g} {r.residual_sq:>18.12g}"
            )
        return "\n".join(lines)


def convergence_report(
    system: MeasureSystem,
    shift: WeightedShift,
    u,
    n: int,
    i_list,
) -> ConvergenceTable:
    """Tabulate, for each window height, the truncated power norm, the cross
    inner product with the original power, and the squared residual of the
    difference (three-term expansion).  Residuals drop to zero once the
    window swallows every support."""
    heights = sorted(set(int(i) for i in i_list))
    if any(i < 1 for i in heights):
        raise ValueError("window heights must be positive")
    original = shift.power_norm_sq(u, n)
    coeffs = shift.power_coefficients(u, n)
    rows = []
    for i in heights:
        entry = truncate(system, shift, i)
        trunc_norm = entry.shift.power_norm_sq(u, n)
        tcoeffs = entry.shift.power_coefficients(u, n)
        cross = _fsum_complex(
            coeffs[w] * tcoeffs[w].conjugate()
            for w in sorted(coeffs, key=vertex_sort_key)
        )
        residual = original + trunc_norm - 2.0 * cross.real
        rows.append(
            ConvergenceRow(
                index=i,
                truncated_norm_sq=trunc_norm,
                cross_inner=cross,
                residual_sq=residual,
            )
        )
    return ConvergenceTable(
        vertex=u, power=n, original_norm_sq=original, rows=tuple(rows)
    )
