"""Consistent measure systems as subnormality certificates.

Builds the two-atom worked system on the half line, verifies the vertex
identity and the moment identities, perturbs one mass to watch the
certificate flip, and constructs a parent measure from child data.
"""

import math

from treeshift import (
    AtomicMeasure,
    MeasureSystem,
    WeightedShift,
    certify_subnormal,
    check_consistency_at,
    make_family,
    moments_match,
    parent_from_children,
)

depth = 4
tree = make_family("unilateral", depth)
base = AtomicMeasure(((1.0, 0.5), (2.0, 0.5)))
t = base.moments(depth + 1)
shift = WeightedShift(tree, {n + 1: math.sqrt(t[n + 1] / t[n]) for n in range(depth)})

mu = {}
current = base
for n in range(depth + 1):
    mu[n] = current.scaled(1.0 / current.total_mass)
    current = current.times_power(1)
system = MeasureSystem(mu=mu, eps={v: 0.0 for v in tree.sorted_vertices})

print("=== the two-atom system on the half line ===")
print(f"measure at 0: {mu[0].atoms}")
print(f"measure at 1: {mu[1].atoms}   (reweighted by s and renormalized)")
rep = check_consistency_at(system, shift, 0)
print(f"identity at vertex 0: ok={rep.ok}, max atom discrepancy {rep.max_discrepancy:.2e}")
mm = moments_match(system, shift, 0, 4)
print(f"measure moments vs power norms at 0: ok={mm.ok}, worst {mm.max_rel_err:.2e}")

cert = certify_subnormal(shift, system, horizon=depth)
print(f"certificate: {cert.status}")

print()
print("=== perturbing one mass by 0.05 ===")
atoms = list(mu[2].atoms)
atoms[0] = (atoms[0][0], atoms[0][1] + 0.05)
bad = MeasureSystem(mu={**mu, 2: AtomicMeasure(tuple(atoms))}, eps=system.eps)
cert2 = certify_subnormal(shift, bad, horizon=depth)
print(f"certificate: {cert2.status}")
print(f"witness: {cert2.witness}")

print()
print("=== building a parent measure from children ===")
t20 = make_family("t-eta-kappa", 1, eta=2, kappa=0)
half = math.sqrt(0.5)
branching = WeightedShift(t20, {(1, 1): half, (2, 1): half})
parent, eps = parent_from_children(
    branching,
    0,
    {(1, 1): AtomicMeasure.delta(1.0), (2, 1): AtomicMeasure.delta(2.0)},
)
print(f"children at 1 and 2 with squared entry weights one half each:")
print(f"  parent atoms {parent.atoms}")
print(f"  deficit mass at zero: {eps}")
