"""Closed-form certifiers for the concrete families: classical unilateral and
bilateral shifts, and the leafless trees with a single branching vertex.

The unilateral certifier reduces to one Hankel test on the running product
sequence of squared weights and then materializes the certificate system by
reweighting a quadrature measure.  The bilateral certifier tests every
left-shift of a two-sided product sequence inside the window.  The branching
certifier dispatches on the trunk length: a single inequality when the
branching vertex is the root, trunk-product equalities plus one terminal
inequality for a finite trunk, an equivalent root-measure formulation, and
the windowed variant of the equalities for an infinite trunk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .consistency import (
    Certificate,
    MeasureSystem,
    certify_subnormal,
    measure_discrepancy,
)
from .moments import (
    AtomicMeasure,
    DeterminacyDiagnostic,
    RefutedSequenceError,
    as_values,
    carleman_diagnostic,
    check_stieltjes,
    measure_from_json,
    quadrature_from_moments,
    scaled_inverse_integral,
)
from .report import CERTIFIED, CONDITIONAL, REFUTED
from .shift import WeightedShift
from .tree import (
    BILATERAL_WINDOW,
    T_ETA_KAPPA,
    UNILATERAL,
    make_family,
    vertex_to_key,
)


def _mod_sq(z: complex) -> float:
    return z.real * z.real + z.imag * z.imag


@dataclass(frozen=True)
class ModelCertificate:
    """Verdict of a closed-form certifier, with its Hankel or condition
    evidence and the cross-certification of the materialized system."""

    status: str
    family: str
    stieltjes: dict
    system_certificate: Certificate | None
    detail: dict
    witness: dict | None

    @property
    def ok(self) -> bool:
        return self.status != REFUTED

    def as_dict(self) -> dict:
        return {
            "status": self.status,
            "family": self.family,
            "stieltjes": {
                k: v.as_dict() if hasattr(v, "as_dict") else v
                for k, v in sorted(self.stieltjes.items())
            },
            "system_certificate": (
                self.system_certificate.as_dict()
                if self.system_certificate is not None
                else None
            ),
            "detail": self.detail,
            "witness": self.witness,
        }


def product_moments(weights: Sequence[complex]) -> tuple:
    """Running squared products 1, |w1|^2, |w1 w2|^2, ... of a weight list."""
    values = [1.0]
    acc = 1.0 + 0.0j
    for w in weights:
        acc = acc * complex(w)
        values.append(_mod_sq(acc))
    return tuple(values)


def _power_system_on_path(tree, first_vertex: int, weights, base: AtomicMeasure):
    """Proof system on an integer path: the measure at step n is the base
    measure reweighted by s^n and normalized; any base mass at zero becomes
    the path root's point mass."""
    shift = WeightedShift(
        tree, {first_vertex + k + 1: w for k, w in enumerate(weights)}
    )
    mu = {}
    eps = {}
    current = base
    for n in range(len(weights) + 1):
        mu[first_vertex + n] = current.scaled(1.0 / current.total_mass)
        eps[first_vertex + n] = (
            base.mass_at_zero / base.total_mass if n == 0 else 0.0
        )
        current = current.times_power(1)
    return MeasureSystem(mu=mu, eps=eps), shift


def certify_unilateral(weights: Sequence[complex], tol: float = 1e-9) -> ModelCertificate:
    """Certify a unilateral classical shift from its weight list.

    With nonzero weights, subnormality is equivalent to the running product
    sequence being a halfline moment sequence; on a pass the proof system
    (powers of the variable against one representing measure) is built and
    cross-certified.  A zero weight falls outside the product criterion, so
    the certifier falls back to per-vertex Hankel necessary conditions and
    can then at best stay conditional.
    """
    weights = [complex(w) for w in weights]
    if len(weights) < 3:
        raise ValueError("need at least three weights")
    if any(w == 0 for w in weights):
        return _unilateral_fallback(weights, tol)
    values = product_moments(weights)
    verdict = check_stieltjes(values, tol=tol)
    if not verdict.consistent:
        return ModelCertificate(
            status=REFUTED,
            family=UNILATERAL,
            stieltjes={"0": verdict},
            system_certificate=None,
            detail={"sequence": list(values)},
            witness={
                "check": "hankel",
                "vertex": "0",
                "block": verdict.witness_block,
                "vector": list(verdict.witness_vector),
                "quadratic_form": verdict.witness_value,
            },
        )
    usable = 2 * (len(values) // 2)
    base = quadrature_from_moments(values[:usable], tol=tol).measure
    depth = usable - 1
    tree = make_family(UNILATERAL, depth)
    system, shift = _power_system_on_path(tree, 0, weights[:depth], base)
    certificate = certify_subnormal(shift, system, horizon=depth, tol=tol)
    return ModelCertificate(
        status=certificate.status,
        family=UNILATERAL,
        stieltjes={"0": verdict},
        system_certificate=certificate,
        detail={
            "sequence": list(values),
            "representing_measure": base.as_dict(),
            "eps_root": base.mass_at_zero,
        },
        witness=certificate.witness,
    )


def _unilateral_fallback(weights, tol) -> ModelCertificate:
    tree = make_family(UNILATERAL, len(weights))
    shift = WeightedShift(tree, {k + 1: w for k, w in enumerate(weights)})
    verdicts = {}
    witness = None
    for k in range(len(weights) - 1):
        avail = len(weights) - k
        if avail < 2:
            break
        v = check_stieltjes(shift.moment_values(k, avail), tol=tol)
        verdicts[str(k)] = v
        if not v.consistent and witness is None:
            witness = {
                "check": "hankel",
                "vertex": vertex_to_key(k),
                "block": v.witness_block,
                "vector": list(v.witness_vector),
                "quadratic_form": v.witness_value,
            }
    status = REFUTED if witness is not None else CONDITIONAL
    return ModelCertificate(
        status=status,
        family=UNILATERAL,
        stieltjes=verdicts,
        system_certificate=None,
        detail={"note": "zero weight: per-vertex necessary conditions only"},
        witness=witness,
    )


@dataclass(frozen=True)
class TwoSidedSequence:
    """Real values t_n indexed over a window [k_min, k_max] containing 0."""

    values: tuple
    k_min: int

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(t) for t in self.values))
        if not self.values:
            raise ValueError("empty two-sided sequence")
        if self.k_min > 0 or self.k_min + len(self.values) - 1 < 0:
            raise ValueError("the window must contain index zero")

    @property
    def k_max(self) -> int:
        return self.k_min + len(self.values) - 1

    def value(self, n: int) -> float:
        if not self.k_min <= n <= self.k_max:
            raise IndexError(f"index {n} outside window [{self.k_min}, {self.k_max}]")
        return self.values[n - self.k_min]

    def left_shift(self, k: int) -> tuple:
        """The one-sided prefix t_{-k}, t_{-k+1}, ..., t_{k_max}."""
        if k < 0 or -k < self.k_min:
            raise IndexError(f"shift {k} outside window")
        return self.values[-k - self.k_min :]

    def as_dict(self) -> dict:
        return {"k_min": self.k_min, "t": list(self.values)}


def two_sided_from_weights(weights: Mapping[int, complex]) -> TwoSidedSequence:
    """Two-sided running products of squared weights: value 1 at index 0,
    forward products above, inverse backward products below."""
    keys = sorted(int(k) for k in weights)
    if not keys:
        raise ValueError("no weights")
    if keys != list(range(keys[0], keys[-1] + 1)):
        raise ValueError("bilateral weights must cover a contiguous index window")
    lo, hi = keys[0], keys[-1]
    if lo > 0 or hi < 1:
        raise ValueError("the window must contain the weights into 0 and 1")
    values = {0: 1.0}
    acc = 1.0 + 0.0j
    for n in range(1, hi + 1):
        acc = acc * complex(weights[n])
        values[n] = _mod_sq(acc)
    acc = 1.0 + 0.0j
    for n in range(0, lo - 1, -1):
        acc = acc * complex(weights[n])
        values[n - 1] = 1.0 / _mod_sq(acc)
    return TwoSidedSequence(
        values=tuple(values[n] for n in range(lo - 1, hi + 1)), k_min=lo - 1
    )


def certify_bilateral(weights: Mapping[int, complex], tol: float = 1e-9) -> ModelCertificate:
    """Certify a bilateral classical shift over a contiguous weight window.

    Every left-shift of the two-sided product sequence that fits in the
    window must pass the Hankel test; on a pass the proof system is built
    from a quadrature measure for the deepest shift and cross-certified on
    the window tree.  Zero weights are rejected (backward products need
    inverses).
    """
    weights = {int(k): complex(w) for k, w in weights.items()}
    zero = [k for k, w in sorted(weights.items()) if w == 0]
    if zero:
        raise ValueError(
            f"bilateral certification needs nonzero weights, got zero at {zero}"
        )
    seq = two_sided_from_weights(weights)
    verdicts = {}
    witness = None
    for k in range(0, -seq.k_min + 1):
        shifted = seq.left_shift(k)
        if len(shifted) < 3:
            continue
        v = check_stieltjes(shifted, tol=tol)
        verdicts[str(k)] = v
        if not v.consistent and witness is None:
            witness = {
                "check": "hankel",
                "shift": k,
                "block": v.witness_block,
                "vector": list(v.witness_vector),
                "quadratic_form": v.witness_value,
            }
    if witness is not None:
        return ModelCertificate(
            status=REFUTED,
            family=BILATERAL_WINDOW,
            stieltjes=verdicts,
            system_certificate=None,
            detail={"two_sided": seq.as_dict()},
            witness=witness,
        )
    root = seq.k_min
    base_values = seq.left_shift(-root)
    usable = 2 * (len(base_values) // 2)
    base = quadrature_from_moments(base_values[:usable], tol=tol).measure
    depth = usable - 1
    top = root + depth
    tree = make_family(BILATERAL_WINDOW, depth=top, back=-root)
    path_weights = [weights[root + k + 1] for k in range(depth)]
    system, shift = _power_system_on_path(tree, root, path_weights, base)
    certificate = certify_subnormal(shift, system, horizon=depth, tol=tol)
    return ModelCertificate(
        status=certificate.status,
        family=BILATERAL_WINDOW,
        stieltjes=verdicts,
        system_certificate=certificate,
        detail={
            "two_sided": seq.as_dict(),
            "representing_measure": base.as_dict(),
        },
        witness=certificate.witness,
    )


@dataclass(frozen=True)
class BranchData:
    """Hypotheses for the one-branching-vertex certifier.

    Branch i carries a probability measure whose moments must reproduce the
    running products of the branch weights past the entry edge; the entry
    weights scale the inverse-moment sums; the trunk weights are listed from
    the branching vertex upward (weights of vertices 0, -1, ...); ``nu`` is
    the optional root measure of the alternative formulation.
    """

    eta: int
    kappa: object  # nonnegative int or math.inf
    branch_measures: tuple
    entry_weights: tuple
    branch_weights: tuple = ()  # per branch: weights along the branch past entry
    trunk_weights: tuple = ()
    nu: AtomicMeasure | None = None

    def __post_init__(self):
        if self.eta < 2:
            raise ValueError("the branching family requires eta >= 2")
        kappa = math.inf if self.kappa in ("inf", math.inf) else int(self.kappa)
        if kappa != math.inf and kappa < 0:
            raise ValueError("kappa must be nonnegative or infinite")
        object.__setattr__(self, "kappa", kappa)
        if len(self.branch_measures) != self.eta:
            raise ValueError("one branch measure per branch required")
        if len(self.entry_weights) != self.eta:
            raise ValueError("one entry weight per branch required")
        object.__setattr__(
            self, "entry_weights", tuple(complex(w) for w in self.entry_weights)
        )
        object.__setattr__(
            self,
            "branch_weights",
            tuple(tuple(complex(w) for w in ws) for ws in self.branch_weights),
        )
        object.__setattr__(
            self, "trunk_weights", tuple(complex(w) for w in self.trunk_weights)
        )
        expected = len(self.trunk_weights)
        if kappa != math.inf and expected != kappa:
            raise ValueError(
                f"finite trunk of length {kappa} needs exactly {kappa} trunk weights"
            )

    @property
    def trunk_window(self) -> int:
        return len(self.trunk_weights)

    def entry_mod_sq(self, i: int) -> float:
        return _mod_sq(self.entry_weights[i])

    def trunk_product_sq(self, length: int) -> float:
        """Squared modulus of the product of the first ``length`` trunk
        weights (those of vertices 0, -1, ..., -(length-1))."""
        acc = 1.0 + 0.0j
        for w in self.trunk_weights[:length]:
            acc *= w
        return _mod_sq(acc)

    def as_dict(self) -> dict:
        out = {
            "eta": self.eta,
            "kappa": "inf" if self.kappa == math.inf else self.kappa,
            "branch_measures": [m.as_dict() for m in self.branch_measures],
            "entry_weights": [{"re": w.real, "im": w.imag} for w in self.entry_weights],
            "branch_weights": [
                [{"re": w.real, "im": w.imag} for w in ws]
                for ws in self.branch_weights
            ],
            "trunk_weights": [
                {"re": w.real, "im": w.imag} for w in self.trunk_weights
            ],
        }
        if self.nu is not None:
            out["nu"] = self.nu.as_dict()
        return out


def _complex_from_json(obj) -> complex:
    if isinstance(obj, (int, float)):
        return complex(obj)
    return complex(obj.get("re", 0.0), obj.get("im", 0.0))


def measures_from_branch_weights(branch_weights, tol: float = 1e-9) -> tuple:
    """Quadrature measures for the running product sequences of each branch;
    the route taken when only weights are supplied, which leaves any
    certificate built on them conditional (one representing measure chosen
    among possibly many)."""
    measures = []
    for ws in branch_weights:
        values = product_moments(ws)
        usable = 2 * (len(values) // 2)
        if usable < 2:
            raise ValueError("need at least one branch weight per branch")
        measures.append(quadrature_from_moments(values[:usable], tol=tol).measure)
    return tuple(measures)


def branch_data_from_json(doc: dict) -> BranchData:
    """Parse a branch document.  When branch measures are absent they are
    reconstructed by quadrature from the branch weights."""
    branch_weights = tuple(
        tuple(_complex_from_json(w) for w in ws)
        for ws in doc.get("branch_weights", [])
    )
    if "branch_measures" in doc:
        measures = tuple(measure_from_json(m) for m in doc["branch_measures"])
    else:
        if not branch_weights:
            raise ValueError(
                "branch document needs branch_measures or branch_weights"
            )
        measures = measures_from_branch_weights(branch_weights)
    return BranchData(
        eta=doc["eta"],
        kappa=doc["kappa"],
        branch_measures=measures,
        entry_weights=tuple(_complex_from_json(w) for w in doc["entry_weights"]),
        branch_weights=branch_weights,
        trunk_weights=tuple(
            _complex_from_json(w) for w in doc.get("trunk_weights", [])
        ),
        nu=measure_from_json(doc["nu"]) if doc.get("nu") else None,
    )


def derive_branch_weights(data: BranchData, depth: int) -> tuple:
    """Branch weight moduli implied by the branch measures: consecutive
    moment ratios give the squared weights along each branch."""
    out = []
    for mu in data.branch_measures:
        mom = mu.moments(depth)
        ws = []
        for n in range(1, depth):
            if mom[n - 1] <= 0.0:
                raise ValueError(
                    "branch measure moments vanish; cannot derive weights"
                )
            ws.append(math.sqrt(mom[n] / mom[n - 1]))
        out.append(tuple(ws))
    return tuple(out)


def verify_branch_moments(data: BranchData, tol: float = 1e-9) -> dict:
    """Check that each branch measure reproduces the running products of its
    branch weights (the hypothesis tying measures to weights)."""
    if not data.branch_weights:
        raise ValueError("no branch weights supplied to verify against")
    worst = 0.0
    rows = []
    for i, (mu, ws) in enumerate(zip(data.branch_measures, data.branch_weights)):
        n_max = len(ws)
        mom = mu.moments(n_max)
        prods = product_moments(ws)
        for n in range(1, n_max + 1):
            rel = abs(mom[n] - prods[n]) / max(1.0, abs(mom[n]), abs(prods[n]))
            worst = max(worst, rel)
            rows.append({"branch": i + 1, "n": n, "moment": mom[n], "product": prods[n]})
        if abs(mu.total_mass - 1.0) > tol:
            worst = max(worst, abs(mu.total_mass - 1.0))
    return {"ok": worst <= tol, "max_rel_err": worst, "rows": rows}


def _inverse_sum(data: BranchData, power: int) -> float:
    """Sum over branches of squared entry weight times inverse moment."""
    return math.fsum(
        scaled_inverse_integral(data.entry_mod_sq(i), data.branch_measures[i], power)
        for i in range(data.eta)
    )


def root_inequality(data: BranchData) -> dict:
    """Rooted-branching-vertex condition: the entry-weighted inverse moment
    sum must not exceed one."""
    s = _inverse_sum(data, 1)
    return {"sum": s, "ok": s <= 1.0 + 1e-9, "equation": "entry-inverse-sum<=1"}


def trunk_conditions(data: BranchData, tol: float = 1e-9) -> dict:
    """Finite/windowed-trunk conditions: the entry-weighted inverse moment
    sum equals one; the trunk-product-scaled deeper inverse sums equal one
    at each interior trunk level; and (finite trunk only) the terminal level
    is at most one."""
    kappa = data.kappa
    window = data.trunk_window
    checks = []
    s1 = _inverse_sum(data, 1)
    checks.append(
        {"level": 0, "value": s1, "target": "=1", "ok": abs(s1 - 1.0) <= tol}
    )
    interior_top = window - 1 if kappa == math.inf else kappa - 1
    for level in range(1, interior_top + 1):
        value = data.trunk_product_sq(level) * _inverse_sum(data, level + 1)
        checks.append(
            {
                "level": level,
                "value": value,
                "target": "=1",
                "ok": abs(value - 1.0) <= tol,
            }
        )
    if kappa != math.inf:
        value = data.trunk_product_sq(kappa) * _inverse_sum(data, kappa + 1)
        checks.append(
            {
                "level": kappa,
                "value": value,
                "target": "<=1",
                "ok": value <= 1.0 + tol,
            }
        )
    ok = all(c["ok"] for c in checks)
    label = "windowed" if kappa == math.inf else "finite"
    return {"ok": ok, "checks": checks, "trunk": label}


def construct_root_measure(data: BranchData, tol: float = 1e-9):
    """Root measure implied by the finite-trunk conditions: the deepest
    inverse reweighting of the branch measures, trunk-product scaled, with
    the deficit mass at zero.  Returns (measure, deficit) or (None, reason)
    when branch mass at zero makes the reweighting infinite."""
    kappa = data.kappa
    if kappa == math.inf or kappa < 1:
        raise ValueError("root measure construction needs a finite trunk >= 1")
    prod = data.trunk_product_sq(kappa)
    total = prod * _inverse_sum(data, kappa + 1)
    if math.isinf(total):
        return None, "branch measure carries mass at zero"
    nu = AtomicMeasure.zero()
    for i in range(data.eta):
        c = data.entry_mod_sq(i)
        if c == 0.0:
            continue
        nu = nu.plus(data.branch_measures[i].times_power(-(kappa + 1)).scaled(c * prod))
    deficit = 1.0 - total
    if deficit > tol:
        nu = nu.plus(AtomicMeasure.delta(0.0, deficit))
    return nu, deficit


def root_measure_conditions(data: BranchData, nu: AtomicMeasure, tol: float = 1e-9) -> dict:
    """Root-measure form of the finite-trunk conditions: nu is a probability
    measure whose first kappa moments match the trunk products measured from
    the root, and whose kappa-th power reweighting equals the trunk-product
    scaled inverse superposition of the branch measures (as measures)."""
    kappa = data.kappa
    if kappa == math.inf:
        raise ValueError("root-measure form needs a finite trunk")
    checks = []
    checks.append(
        {
            "item": "nu-probability",
            "value": nu.total_mass,
            "ok": abs(nu.total_mass - 1.0) <= tol,
        }
    )
    for n in range(1, kappa + 1):
        # squared product of the first n trunk weights below the root:
        # weights of vertices -(kappa-1) .. -(kappa-n)
        acc = 1.0 + 0.0j
        for j in range(kappa - n, kappa):
            acc *= data.trunk_weights[j]
        target = _mod_sq(acc)
        value = nu.moment(n)
        checks.append(
            {
                "item": f"nu-moment-{n}",
                "value": value,
                "target": target,
                "ok": abs(value - target) <= tol * max(1.0, abs(target)),
            }
        )
    lhs = nu.times_power(kappa)
    rhs = AtomicMeasure.zero()
    prod = data.trunk_product_sq(kappa)
    infinite = False
    for i in range(data.eta):
        c = data.entry_mod_sq(i)
        if c == 0.0:
            continue
        if data.branch_measures[i].mass_at_zero > 0.0:
            infinite = True
            break
        rhs = rhs.plus(data.branch_measures[i].times_power(-1).scaled(c * prod))
    if infinite:
        checks.append({"item": "measure-identity", "value": math.inf, "ok": False})
    else:
        disc, at = measure_discrepancy(lhs, rhs)
        checks.append(
            {
                "item": "measure-identity",
                "value": disc,
                "position": at,
                "ok": disc <= tol * max(1.0, lhs.total_mass, rhs.total_mass),
            }
        )
    return {"ok": all(c["ok"] for c in checks), "checks": checks}


def root_measure_equivalence_check(data: BranchData, tol: float = 1e-9) -> dict:
    """Verify that the trunk-equality form and the root-measure form of the
    finite-trunk conditions return the same verdict.

    The forward direction constructs the canonical root measure from the
    branch data and evaluates the root-measure form on it; the reverse
    direction recovers the trunk-equality quantities from that measure's
    moments and compares them with the directly computed ones.
    """
    kappa = data.kappa
    if kappa == math.inf or kappa < 1:
        raise ValueError("equivalence check needs a finite trunk >= 1")
    direct = trunk_conditions(data, tol=tol)
    nu = data.nu
    constructed = False
    reason = ""
    if nu is None:
        nu, deficit = construct_root_measure(data, tol=tol)
        constructed = True
        if nu is None:
            reason = str(deficit)
    if nu is None:
        via_measure = {"ok": False, "checks": [], "reason": reason}
    else:
        via_measure = root_measure_conditions(data, nu, tol=tol)
    recovered = []
    if nu is not None:
        prod_full = data.trunk_product_sq(kappa)
        for level in range(0, kappa):
            # moments of nu recover the interior equalities level by level
            denom = 1.0 + 0.0j
            for j in range(level, kappa):
                denom *= data.trunk_weights[j]
            denom_sq = _mod_sq(denom)
            value = nu.moment(kappa - level) / denom_sq if denom_sq > 0 else math.inf
            recovered.append({"level": level, "value": value})
    return {
        "trunk_form": direct,
        "measure_form": via_measure,
        "nu_constructed": constructed,
        "nu": nu.as_dict() if nu is not None else None,
        "recovered_from_nu": recovered,
        "agree": direct["ok"] == via_measure["ok"],
    }


def branching_tree_system(data: BranchData, depth: int, tol: float = 1e-9):
    """Materialize the certificate system on the branching tree window.

    Branch vertices get powers of their branch measure; the branching vertex
    and the trunk get the inverse-reweighted superpositions; the deficit, if
    any, sits at the root (or at the branching vertex when it is the root).
    """
    kappa = data.kappa
    window = data.trunk_window
    tree = make_family(
        T_ETA_KAPPA,
        depth,
        eta=data.eta,
        kappa="inf" if kappa == math.inf else kappa,
    )
    if kappa == math.inf and window != depth:
        raise ValueError(
            "infinite-trunk window must match the tree depth "
            f"({window} trunk weights vs depth {depth})"
        )
    if data.branch_weights:
        branch_weights = data.branch_weights
        if any(len(ws) < depth - 1 for ws in branch_weights):
            raise ValueError(
                f"need at least {depth - 1} branch weights per branch for depth {depth}"
            )
    else:
        branch_weights = derive_branch_weights(data, depth)
    weights = {}
    for i in range(1, data.eta + 1):
        weights[(i, 1)] = data.entry_weights[i - 1]
        for j in range(2, depth + 1):
            weights[(i, j)] = branch_weights[i - 1][j - 2]
    trunk_len = depth if kappa == math.inf else kappa
    for ell in range(trunk_len):
        weights[-ell] = data.trunk_weights[ell]
    shift = WeightedShift(tree, weights)
    mu = {}
    eps = {}
    for i in range(1, data.eta + 1):
        base = data.branch_measures[i - 1]
        current = base
        for j in range(1, depth + 1):
            mu[(i, j)] = current.scaled(1.0 / current.total_mass)
            eps[(i, j)] = 0.0
            current = current.times_power(1)
    branching, eps0 = _branching_vertex_measure(data)
    mu[0] = branching
    eps[0] = eps0 if kappa == 0 else 0.0
    for ell in range(1, trunk_len + 1):
        prod = data.trunk_product_sq(ell)
        acc = AtomicMeasure.zero()
        for i in range(data.eta):
            c = data.entry_mod_sq(i)
            if c == 0.0:
                continue
            acc = acc.plus(
                data.branch_measures[i].times_power(-(ell + 1)).scaled(c * prod)
            )
        deficit = 1.0 - acc.total_mass
        if ell == kappa and deficit > tol:
            acc = acc.plus(AtomicMeasure.delta(0.0, deficit))
            eps[-ell] = deficit
        else:
            eps[-ell] = 0.0
        mu[-ell] = acc
    if kappa != math.inf and kappa >= 1 and data.nu is not None:
        mu[-kappa] = data.nu
        eps[-kappa] = data.nu.mass_at_zero
    return MeasureSystem(mu=mu, eps=eps), shift


def _branching_vertex_measure(data: BranchData):
    acc = AtomicMeasure.zero()
    for i in range(data.eta):
        c = data.entry_mod_sq(i)
        if c == 0.0:
            continue
        acc = acc.plus(data.branch_measures[i].times_power(-1).scaled(c))
    deficit = 1.0 - acc.total_mass
    if data.kappa == 0 and deficit > 0.0:
        acc = acc.plus(AtomicMeasure.delta(0.0, deficit))
    return acc, max(0.0, deficit)


def certify_t_eta_kappa(
    data: BranchData,
    depth: int = 8,
    tol: float = 1e-9,
    conditional: bool = False,
) -> ModelCertificate:
    """Certify a shift on the one-branching-vertex tree from branch data.

    The branch-measure hypothesis is verified first (or the branch weights
    are derived from the measures when absent).  The condition set then
    depends on the trunk: the root inequality for a rooted branching vertex,
    the trunk equalities (or, when a root measure is supplied, the
    root-measure form) for a finite trunk, and the windowed equalities for
    an infinite trunk.  On a pass the explicit certificate system is built
    and cross-certified.
    """
    kappa = data.kappa
    if any(w == 0 for w in data.entry_weights) or any(
        w == 0 for w in data.trunk_weights
    ):
        raise ValueError("the branching certifier requires nonzero weights")
    if kappa == math.inf:
        depth = data.trunk_window
    detail: dict = {}
    if data.branch_weights:
        hypothesis = verify_branch_moments(data, tol=tol)
        detail["branch_moment_check"] = hypothesis
        if not hypothesis["ok"]:
            raise ValueError(
                "branch measures do not represent branch weights "
                f"(max relative error {hypothesis['max_rel_err']})"
            )
    witness = None
    if kappa == 0:
        cond = root_inequality(data)
        detail["condition"] = cond
        if not cond["ok"]:
            witness = {
                "check": "entry-inverse-sum",
                "vertex": "0",
                "value": cond["sum"],
                "reason": f"entry-weighted inverse moment sum {cond['sum']} > 1",
            }
    elif kappa != math.inf and data.nu is not None:
        cond = root_measure_conditions(data, data.nu, tol=tol)
        detail["condition"] = cond
        if not cond["ok"]:
            bad = next(c for c in cond["checks"] if not c["ok"])
            witness = {
                "check": "root-measure-form",
                "vertex": vertex_to_key(-kappa),
                "item": bad["item"],
                "value": bad.get("value"),
                "reason": f"root-measure condition {bad['item']} fails",
            }
    else:
        cond = trunk_conditions(data, tol=tol)
        detail["condition"] = cond
        if not cond["ok"]:
            bad = next(c for c in cond["checks"] if not c["ok"])
            witness = {
                "check": "trunk-conditions",
                "vertex": vertex_to_key(-bad["level"]),
                "level": bad["level"],
                "value": bad["value"],
                "reason": (
                    f"trunk condition at level {bad['level']} gives "
                    f"{bad['value']} (target {bad['target']})"
                ),
            }
    if witness is not None:
        return ModelCertificate(
            status=REFUTED,
            family=T_ETA_KAPPA,
            stieltjes={},
            system_certificate=None,
            detail=detail,
            witness=witness,
        )
    if kappa == math.inf:
        detail["window_note"] = (
            f"infinite trunk checked on a window of {data.trunk_window} levels"
        )
    system, shift = branching_tree_system(data, depth, tol=tol)
    certificate = certify_subnormal(shift, system, horizon=depth, tol=tol)
    status = certificate.status
    if status == CERTIFIED and conditional:
        status = CONDITIONAL
    from .tree import vertex_sort_key

    detail["eps"] = {
        vertex_to_key(v): system.eps_at(v)
        for v in sorted(system.eps, key=vertex_sort_key)
        if system.eps_at(v) > 0.0
    }
    return ModelCertificate(
        status=status,
        family=T_ETA_KAPPA,
        stieltjes={},
        system_certificate=certificate,
        detail=detail,
        witness=certificate.witness,
    )


@dataclass(frozen=True)
class BranchExtraction:
    """Branch data recovered from per-vertex moment sequences, with the
    condition verdicts and the determinacy diagnostic that qualifies them."""

    data: BranchData
    status: str
    conditions: dict
    diagnostic: DeterminacyDiagnostic
    sequence_checks: dict
    notes: tuple

    def as_dict(self) -> dict:
        return {
            "data": self.data.as_dict(),
            "status": self.status,
            "conditions": self.conditions,
            "diagnostic": self.diagnostic.as_dict(),
            "sequence_checks": {
                k: v.as_dict() for k, v in sorted(self.sequence_checks.items())
            },
            "notes": list(self.notes),
        }


def extract_branch_data(
    shift: WeightedShift, sequences: Mapping, tol: float = 1e-9
) -> BranchExtraction:
    """Recover branch measures from moment sequences on a branching tree and
    check the condition set the trunk length calls for.

    Sequences are required at the trunk vertices, the branching vertex, and
    the first vertex of each branch.  Branch measures come from quadrature;
    all verdicts are conditional on the determinacy diagnostic of the
    branching vertex's shifted sequence (the quasi-analytic route).
    """
    tree = shift.tree
    if tree.family != T_ETA_KAPPA:
        raise ValueError("extraction works on the one-branching-vertex family")
    eta = tree.params["eta"]
    kappa = tree.params["kappa"]
    trunk_len = tree.params["depth"] if kappa == math.inf else kappa
    required = [-ell for ell in range(trunk_len + 1)] + [
        (i, 1) for i in range(1, eta + 1)
    ]
    checks = {}
    for v in required:
        if v not in sequences:
            raise ValueError(f"no moment sequence supplied for vertex {v!r}")
        values = as_values(sequences[v])
        verdict = check_stieltjes(values, tol=tol)
        checks[vertex_to_key(v)] = verdict
        if not verdict.consistent:
            raise RefutedSequenceError(
                f"sequence at {v!r} fails the Hankel test", verdict
            )
    notes = []
    for v in required:
        values = as_values(sequences[v])
        avail = tree.available_depth(v)
        top = int(min(len(values) - 1, avail if avail != math.inf else len(values) - 1))
        for n in range(top + 1):
            lhs = values[n]
            rhs = shift.power_norm_sq(v, n)
            if abs(lhs - rhs) > tol * max(1.0, abs(lhs), abs(rhs)):
                raise ValueError(
                    f"sequence at {v!r} disagrees with the shift at order {n}: "
                    f"{lhs} vs {rhs}"
                )
    measures = []
    for i in range(1, eta + 1):
        values = as_values(sequences[(i, 1)])
        usable = 2 * (len(values) // 2)
        measures.append(quadrature_from_moments(values[:usable], tol=tol).measure)
    trunk_weights = tuple(
        shift.weight(-ell) for ell in range(trunk_len)
    )
    branch_depth = tree.params["depth"]
    branch_weights = tuple(
        tuple(shift.weight((i, j)) for j in range(2, branch_depth + 1))
        for i in range(1, eta + 1)
    )
    data = BranchData(
        eta=eta,
        kappa=kappa,
        branch_measures=tuple(measures),
        entry_weights=tuple(shift.weight((i, 1)) for i in range(1, eta + 1)),
        branch_weights=branch_weights,
        trunk_weights=trunk_weights,
    )
    conditions: dict = {}
    usable_zero = as_values(sequences[0])
    moment_check = verify_branch_moments(data, tol=max(tol, 1e-8))
    conditions["branch_moment_check"] = moment_check
    if kappa == 0:
        conditions["condition"] = root_inequality(data)
    elif kappa == math.inf:
        conditions["condition"] = trunk_conditions(data, tol=max(tol, 1e-8))
        notes.append("infinite trunk: equalities checked up to the window")
    else:
        conditions["condition"] = trunk_conditions(data, tol=max(tol, 1e-8))
        nu_values = as_values(sequences[-kappa])
        usable = 2 * (len(nu_values) // 2)
        nu = quadrature_from_moments(nu_values[:usable], tol=tol).measure
        conditions["root_measure_form"] = root_measure_conditions(
            data, nu, tol=max(tol, 1e-8)
        )
    diagnostic = carleman_diagnostic(usable_zero[1:])
    all_ok = conditions["condition"]["ok"] and moment_check["ok"]
    if "root_measure_form" in conditions:
        all_ok = all_ok and conditions["root_measure_form"]["ok"]
    status = CONDITIONAL if all_ok else REFUTED
    notes.append(
        "verdict conditional on determinacy; diagnostic label: "
        + diagnostic.label
    )
    if status == REFUTED:
        notes.append(
            "refutation is itself conditional: quadrature picked one "
            "representing measure among possibly many"
        )
    return BranchExtraction(
        data=data,
        status=status,
        conditions=conditions,
        diagnostic=diagnostic,
        sequence_checks=checks,
        notes=tuple(notes),
    )
