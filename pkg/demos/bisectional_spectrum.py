"""Extremes of the real bisectional curvature B at a point.

B depends on a unitary frame and on nonnegative weights a. For
Fubini-Study the holomorphic sectional curvature is constant (2) while B
ranges over [2, 4]; for the Hopf metric B touches zero.

    python3 demos/bisectional_spectrum.py
"""

import numpy as np

from chernlab import catalog, functionals
from chernlab.chern import point_tensors
from chernlab.dsl import metric_jet

rng = np.random.default_rng(0)
for name, z in (("fubini_study3", [0, 0, 0]), ("fubini_study3", [0.3, -0.2j, 0.5]), ("hopf3", [1, 0.5j, 0.2 - 0.3j])):
    entry = catalog.load_builtin(name)
    R = point_tensors(metric_jet(entry.spec, z)).curvature
    sp = functionals.rbc_extremes(R)
    hs = [functionals.hsc(R, rng.normal(size=3) + 1j * rng.normal(size=3)) for _ in range(200)]
    print(f"{name} at {z}")
    print(f"  B in [{sp.min_value:.6f}, {sp.max_value:.6f}]  ({sp.sign()}, converged={sp.converged})")
    print(f"  H over 200 random directions in [{min(hs):.6f}, {max(hs):.6f}]")
    u, a = sp.argmax
    print(f"  weights at the maximum: {np.round(a, 4)}")
