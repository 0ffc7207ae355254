"""Consistent systems of probability measures attached to a weighted shift.

A system assigns to each vertex a probability measure and a nonnegative
scalar.  The defining identity at a vertex u equates the measure at u with
the superposition of its children's measures reweighted by 1/s and scaled by
the squared child weights, plus the scalar's point mass at zero.  A system
verified at every vertex of the window is a subnormality certificate for the
shift, up to the window horizon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

from .moments import (
    AtomicMeasure,
    as_values,
    carleman_diagnostic,
    measure_from_json,
    quadrature_from_moments,
    scaled_inverse_integral,
)
from .report import CERTIFIED, CONDITIONAL, REFUTED
from .tree import vertex_from_key, vertex_sort_key, vertex_to_key

POSITION_TOL = 1e-12


class ConsistencySumError(ValueError):
    """The weighted inverse-moment sum at a vertex exceeds one, so no
    probability measure at the parent can close the identity."""


@dataclass(frozen=True)
class MeasureSystem:
    """Per-vertex probability measures plus per-vertex point masses at zero."""

    mu: Mapping
    eps: Mapping
    determinacy: Mapping | None = None

    def __post_init__(self):
        object.__setattr__(self, "mu", dict(self.mu))
        object.__setattr__(self, "eps", {v: float(e) for v, e in self.eps.items()})
        if any(e < 0 for e in self.eps.values()):
            raise ValueError("point masses at zero must be nonnegative")

    @property
    def conditional(self) -> bool:
        return self.determinacy is not None

    def measure(self, u) -> AtomicMeasure:
        if u not in self.mu:
            raise KeyError(f"no measure stored for vertex {u!r}")
        return self.mu[u]

    def eps_at(self, u) -> float:
        return self.eps.get(u, 0.0)

    def restricted_to(self, vertices) -> "MeasureSystem":
        keep = set(vertices)
        det = None
        if self.determinacy is not None:
            det = {v: d for v, d in self.determinacy.items() if v in keep}
        return MeasureSystem(
            mu={v: m for v, m in self.mu.items() if v in keep},
            eps={v: e for v, e in self.eps.items() if v in keep},
            determinacy=det,
        )

    def as_dict(self) -> dict:
        out = {
            "measures": {
                vertex_to_key(v): self.mu[v].as_dict()
                for v in sorted(self.mu, key=vertex_sort_key)
            },
            "eps": {
                vertex_to_key(v): self.eps[v]
                for v in sorted(self.eps, key=vertex_sort_key)
            },
        }
        if self.determinacy is not None:
            out["determinacy"] = {
                vertex_to_key(v): self.determinacy[v].as_dict()
                for v in sorted(self.determinacy, key=vertex_sort_key)
            }
        return out


def system_from_json(doc: dict) -> MeasureSystem:
    mu = {
        vertex_from_key(k): measure_from_json(m)
        for k, m in doc["measures"].items()
    }
    eps = {vertex_from_key(k): float(e) for k, e in doc.get("eps", {}).items()}
    return MeasureSystem(mu=mu, eps=eps)


def measure_discrepancy(actual: AtomicMeasure, expected: AtomicMeasure):
    """Largest atom-mass difference after aligning positions within tolerance.

    Returns (max difference, position where it occurs).
    """
    ai, ei = 0, 0
    worst = 0.0
    worst_at = None
    a, e = actual.atoms, expected.atoms
    while ai < len(a) or ei < len(e):
        if ei >= len(e) or (ai < len(a) and a[ai][0] < e[ei][0] - POSITION_TOL):
            d, at = a[ai][1], a[ai][0]
            ai += 1
        elif ai >= len(a) or e[ei][0] < a[ai][0] - POSITION_TOL:
            d, at = e[ei][1], e[ei][0]
            ei += 1
        else:
            d, at = abs(a[ai][1] - e[ei][1]), a[ai][0]
            ai += 1
            ei += 1
        if d > worst:
            worst, worst_at = d, at
    return worst, worst_at


@dataclass(frozen=True)
class ConsistencyReport:
    """Outcome of checking the defining identity at one vertex."""

    vertex: object
    depth: int
    ok: bool
    max_discrepancy: float
    discrepancy_position: float | None
    eps_stored: float
    eps_computed: float | None
    reason: str = ""

    def as_dict(self) -> dict:
        return {
            "vertex": vertex_to_key(self.vertex),
            "depth": self.depth,
            "ok": self.ok,
            "max_discrepancy": self.max_discrepancy,
            "discrepancy_position": self.discrepancy_position,
            "eps_stored": self.eps_stored,
            "eps_computed": self.eps_computed,
            "reason": self.reason,
        }


def _consistency_rhs(system, shift, u, n):
    """Right-hand side of the depth-n identity at u, or an inconsistency
    reason when a child carries mass at zero under a nonzero weight."""
    rhs = AtomicMeasure.zero()
    inv_sum_terms = []
    for v in sorted(shift.tree.children_n(u, n), key=vertex_sort_key):
        if n == 1:
            coeff = shift.modulus_sq(v)
        else:
            pw = shift.path_weight(u, v)
            coeff = pw.real * pw.real + pw.imag * pw.imag
        if coeff == 0.0:
            continue
        mu_v = system.measure(v)
        if mu_v.mass_at_zero > 0.0:
            return None, None, (
                f"child {v!r} carries mass {mu_v.mass_at_zero} at zero "
                "under a nonzero path weight"
            )
        rhs = rhs.plus(mu_v.times_power(-n).scaled(coeff))
        inv_sum_terms.append(scaled_inverse_integral(coeff, mu_v, n))
    inv_sum = math.fsum(inv_sum_terms)
    eps = system.eps_at(u)
    if eps > 0.0:
        rhs = rhs.plus(AtomicMeasure.delta(0.0, eps))
    return rhs, inv_sum, ""


def propagate_check(system, shift, u, n: int, tol: float = 1e-9) -> ConsistencyReport:
    """Check the depth-n propagation identity at u: the measure at u must be
    the 1/s^n reweighted superposition over the n-th generation plus the
    stored point mass at zero."""
    if n < 1:
        raise ValueError("propagation depth starts at 1")
    mu_u = system.measure(u)
    rhs, inv_sum, reason = _consistency_rhs(system, shift, u, n)
    eps_stored = system.eps_at(u)
    if rhs is None:
        return ConsistencyReport(
            vertex=u,
            depth=n,
            ok=False,
            max_discrepancy=math.inf,
            discrepancy_position=0.0,
            eps_stored=eps_stored,
            eps_computed=None,
            reason=reason,
        )
    eps_computed = 1.0 - inv_sum
    scale = max(1.0, mu_u.total_mass)
    disc, disc_at = measure_discrepancy(mu_u, rhs)
    problems = []
    if disc > tol * scale:
        problems.append("atom mismatch between stored and reconstructed measure")
    if abs(mu_u.total_mass - 1.0) > tol:
        problems.append(f"measure at {u!r} has total mass {mu_u.total_mass}")
    if abs(eps_stored - eps_computed) > tol:
        problems.append(
            f"stored zero-mass {eps_stored} differs from deficit {eps_computed}"
        )
    return ConsistencyReport(
        vertex=u,
        depth=n,
        ok=not problems,
        max_discrepancy=disc,
        discrepancy_position=disc_at,
        eps_stored=eps_stored,
        eps_computed=eps_computed,
        reason="; ".join(problems),
    )


def check_consistency_at(system, shift, u, tol: float = 1e-9) -> ConsistencyReport:
    """Check the defining (depth-one) identity at u."""
    return propagate_check(system, shift, u, 1, tol=tol)


@dataclass(frozen=True)
class MomentsMatchReport:
    """Comparison of measure moments against squared power norms at a vertex."""

    vertex: object
    rows: tuple  # (n, measure_moment, shift_norm_sq, rel_err)
    ok: bool
    max_rel_err: float

    def as_dict(self) -> dict:
        return {
            "vertex": vertex_to_key(self.vertex),
            "rows": [
                {"n": n, "measure_moment": a, "shift_norm_sq": b, "rel_err": r}
                for n, a, b, r in self.rows
            ],
            "ok": self.ok,
            "max_rel_err": self.max_rel_err,
        }


def moments_match(system, shift, u, n_max: int, tol: float = 1e-9) -> MomentsMatchReport:
    """Verify that the moments of the measure at u reproduce the squared
    power norms of the shift at u, up to n_max or the window horizon."""
    mu_u = system.measure(u)
    avail = shift.tree.available_depth(u)
    top = int(min(n_max, avail)) if avail != math.inf else n_max
    rows = []
    worst = 0.0
    for n in range(top + 1):
        lhs = mu_u.moment(n)
        rhs = shift.power_norm_sq(u, n)
        rel = abs(lhs - rhs) / max(1.0, abs(lhs), abs(rhs))
        worst = max(worst, rel)
        rows.append((n, lhs, rhs, rel))
    return MomentsMatchReport(
        vertex=u, rows=tuple(rows), ok=worst <= tol, max_rel_err=worst
    )


def parent_from_children(
    shift, u, child_measures: Mapping, tol: float = 1e-9
) -> tuple[AtomicMeasure, float]:
    """Construct the unique measure at u closing the identity over the given
    child measures, together with its deficit mass at zero.

    Fails with :class:`ConsistencySumError` when the weighted inverse-moment
    sum exceeds one (no probability parent exists along this route).
    """
    children = shift.tree.children(u)
    if set(child_measures) != set(children):
        raise ValueError(
            f"child measures must be keyed exactly by the children of {u!r}"
        )
    total = math.fsum(
        scaled_inverse_integral(shift.modulus_sq(v), child_measures[v])
        for v in children
    )
    if total > 1.0 + tol:
        raise ConsistencySumError(
            f"weighted inverse-moment sum at {u!r} is {total} > 1"
        )
    mu_u = AtomicMeasure.zero()
    for v in sorted(children, key=vertex_sort_key):
        c = shift.modulus_sq(v)
        if c == 0.0:
            continue
        mu_u = mu_u.plus(child_measures[v].times_power(-1).scaled(c))
    eps = max(0.0, 1.0 - total)
    # rounding dust below the verification resolution would plant a spurious
    # atom at zero, which downstream identities treat as a hard obstruction
    if eps <= 1e-12:
        eps = 0.0
    else:
        mu_u = mu_u.plus(AtomicMeasure.delta(0.0, eps))
    return mu_u, eps


def child_from_parent_single(shift, u0, mu_parent: AtomicMeasure) -> AtomicMeasure:
    """Invert the identity when u0 has a single child: reweight the parent
    measure by s and divide by the squared child weight."""
    children = shift.tree.children(u0)
    if len(children) != 1:
        raise ValueError(f"{u0!r} must have exactly one child")
    (u1,) = children
    c = shift.modulus_sq(u1)
    if c == 0.0:
        raise ValueError(f"the weight into {u1!r} vanishes")
    return mu_parent.times_power(1).scaled(1.0 / c)


def build_system_from_sequences(
    shift, sequences: Mapping, tol: float = 1e-9
) -> MeasureSystem:
    """Assemble a measure system from per-vertex moment sequences.

    Vertices with children (and frontier vertices, which stand for vertices
    whose children lie past the window) receive the quadrature measure of
    their sequence; true leaves receive the point mass at zero.  The result
    carries per-vertex determinacy diagnostics and is therefore flagged
    conditional: quadrature picks one representing measure among possibly
    many.
    """
    tree = shift.tree
    mu: dict = {}
    eps: dict = {}
    diagnostics: dict = {}
    needs_measure = [
        v
        for v in tree.sorted_vertices
        if tree.children(v) or v in tree.frontier
    ]
    for v in needs_measure:
        if v not in sequences:
            raise ValueError(f"no moment sequence supplied for vertex {v!r}")
        values = as_values(sequences[v])
        result = quadrature_from_moments(values, tol=tol)
        mu[v] = result.measure
        if len(values) >= 3:
            diagnostics[v] = carleman_diagnostic(values[1:])
    for v in tree.sorted_vertices:
        if v not in mu:
            mu[v] = AtomicMeasure.delta(0.0)
            eps[v] = 1.0
    for v in tree.sorted_vertices:
        if v in eps:
            continue
        children = tree.children(v)
        if children:
            total = math.fsum(
                scaled_inverse_integral(shift.modulus_sq(c), mu[c])
                for c in children
            )
            eps[v] = max(0.0, 1.0 - total)
        else:
            eps[v] = mu[v].mass_at_zero
    return MeasureSystem(mu=mu, eps=eps, determinacy=diagnostics)


@dataclass(frozen=True)
class Certificate:
    """Aggregated verdict for a shift/system pair.

    ``certified-up-to-horizon`` means every reachable check passed;
    ``refuted`` names the first failing check (the supplied system is not a
    certificate; with determinate moment data this also refutes
    subnormality, otherwise another system may still exist); ``conditional``
    means every check passed but the system was built through quadrature
    choices that rest on determinacy diagnostics.
    """

    status: str
    consistency: tuple
    moments: tuple
    structural: object
    eps_violations: tuple
    witness: dict | None
    notes: tuple
    horizon: int
    tol: float

    @property
    def ok(self) -> bool:
        return self.status != REFUTED

    def as_dict(self) -> dict:
        return {
            "status": self.status,
            "horizon": self.horizon,
            "tol": self.tol,
            "consistency": [r.as_dict() for r in self.consistency],
            "moments": [r.as_dict() for r in self.moments],
            "structural": self.structural.as_dict(),
            "eps_violations": [vertex_to_key(v) for v in self.eps_violations],
            "witness": self.witness,
            "notes": list(self.notes),
        }


def certify_subnormal(
    shift,
    system: MeasureSystem | None = None,
    sequences: Mapping | None = None,
    horizon: int = 16,
    tol: float = 1e-9,
) -> Certificate:
    """Run the full per-vertex verification of a measure system.

    Either a system or per-vertex moment sequences must be given; sequences
    are turned into a system first (conditionally, via quadrature).  The
    identity is checked at every vertex whose children are inside the
    window, measure moments are compared with power norms, structural
    obstructions are reported, and with nonzero weights the zero masses on
    non-root vertices must vanish.
    """
    if (system is None) == (sequences is None):
        raise ValueError("supply exactly one of system= or sequences=")
    notes: list[str] = []
    if system is None:
        system = build_system_from_sequences(shift, sequences, tol=tol)
        notes.append("system built from moment sequences via quadrature")
    tree = shift.tree
    missing = [v for v in tree.sorted_vertices if v not in system.mu]
    if missing:
        raise ValueError(
            "system lacks measures for: "
            + ", ".join(repr(v) for v in missing)
        )
    if tree.rootless_family:
        notes.append(
            "rootless family certified on the rooted window (subtree reduction)"
        )
    notes.append(f"verdict holds up to horizon {horizon}")

    witness = None
    consistency_reports = []
    moment_reports = []
    for u in tree.sorted_vertices:
        if tree.available_depth(u) < 1:
            continue
        rep = check_consistency_at(system, shift, u, tol=tol)
        consistency_reports.append(rep)
        if not rep.ok and witness is None:
            witness = {
                "vertex": vertex_to_key(u),
                "check": "consistency-identity",
                "discrepancy": rep.max_discrepancy,
                "position": rep.discrepancy_position,
                "reason": rep.reason,
            }
    for u in tree.sorted_vertices:
        rep = moments_match(system, shift, u, horizon, tol=tol)
        moment_reports.append(rep)
        if not rep.ok and witness is None:
            witness = {
                "vertex": vertex_to_key(u),
                "check": "moment-identity",
                "discrepancy": rep.max_rel_err,
                "position": None,
                "reason": "measure moments disagree with power norms",
            }
    structural = shift.structural_checks()
    if structural.not_hyponormal and witness is None:
        witness = {
            "vertex": None,
            "check": "structural",
            "discrepancy": None,
            "position": None,
            "reason": structural.verdict,
        }
    eps_violations = ()
    if shift.has_nonzero_weights:
        eps_violations = tuple(
            v
            for v in tree.sorted_vertices
            if v in tree.parent and system.eps_at(v) > tol
        )
        if eps_violations and witness is None:
            witness = {
                "vertex": vertex_to_key(eps_violations[0]),
                "check": "zero-mass-on-nonroot",
                "discrepancy": system.eps_at(eps_violations[0]),
                "position": 0.0,
                "reason": "nonzero weights force vanishing zero masses off the root",
            }
    if witness is not None:
        status = REFUTED
    elif system.conditional:
        status = CONDITIONAL
        notes.append("conditional on determinacy of the supplied sequences")
    else:
        status = CERTIFIED
    return Certificate(
        status=status,
        consistency=tuple(consistency_reports),
        moments=tuple(moment_reports),
        structural=structural,
        eps_violations=eps_violations,
        witness=witness,
        notes=tuple(notes),
        horizon=horizon,
        tol=tol,
    )
