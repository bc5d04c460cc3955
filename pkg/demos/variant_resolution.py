"""Decide between competing index readings of two curvature identities.

The second Bianchi identity and one of the torsion commutation formulas
each come in two registered readings. A reading that is a true identity
has residual at roundoff on every metric; a wrong one shows up as an O(1)
residual on some metric. Special metrics can hide the difference, so we
also use a metric with no structure at all.

    python3 demos/variant_resolution.py
"""

from chernlab import catalog
from chernlab.catalog import Box, CatalogEntry
from chernlab.chern import point_tensors
from chernlab.dsl import MetricSpec, metric_jet
from chernlab.identities import VARIANTS, IdentityId, evaluate

generic = CatalogEntry(
    MetricSpec.from_strings(
        "generic",
        [
            ["1 + z1*w1 + 0.5*z2*w2", "0.3*z1*w2 + 0.2*w3", "0.25*z3*w1"],
            ["0.3*w1*z2 + 0.2*z3", "1 + 2*z2*w2 + z1*w1*z3*w3", "0.1*z1*w3*z2"],
            ["0.25*w3*z1", "0.1*w1*z3*w2", "1 + z3*w3*(1 + z1*w1)"],
        ],
    ),
    (Box((-0.4, 0.4), (-0.4, 0.4)),) * 3,
)

entries = [catalog.load_builtin("fubini_study3"), catalog.load_builtin("hopf3"), generic]
print(f"{'metric':<15}{'identity':<10}worst residual per reading")
for entry in entries:
    pts = [point_tensors(metric_jet(entry.spec, z)) for z in catalog.sample_points(entry, 5, seed=1)]
    for ident in (IdentityId.B2, IdentityId.C2):
        worst = {v: 0.0 for v in VARIANTS[ident]}
        for pt in pts:
            for r in evaluate(ident, pt):
                worst[r.variant] = max(worst[r.variant], r.max_abs_residual)
        cells = "   ".join(f"{v:>14} {w:8.1e}" for v, w in worst.items())
        print(f"{entry.name:<15}{ident.value:<10}{cells}")

# Fubini-Study is Kahler (T = 0) so neither identity can tell its readings apart;
# hopf3 separates the Bianchi readings, the generic metric separates the other pair.
