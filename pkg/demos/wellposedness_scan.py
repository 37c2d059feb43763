"""Scan contrasts for both model geometries and show the corner exponent.

The corner exponent decides the admissible range of the regularization exponent
q, printed alongside.
"""
import numpy as np

from smoothext import analysis, optimize

print("annulus forbidden contrasts:", ", ".join(f"{k:.4f}" for k in analysis.annulus_forbidden_set(5)))
for kappa in (-0.6, -0.7, -2.0):
    print(f"  annulus kappa={kappa:5.2f}: {analysis.annulus_wellposed(kappa).verdict}")

print("\ncorner, pi/4 angle")
for kappa in np.concatenate([-np.geomspace(50, 3.05, 8), [-2.0, -0.5, 2.0, 10.0]]):
    v = analysis.corner_wellposed(kappa)
    if v.well_posed:
        lo, hi = optimize.recommended_q(v.sigma_d, 1.0)
        print(f"  kappa={kappa:8.3f}  sigma_D={v.sigma_d:.5f}  q in ({lo:g}, {hi:.4f})")
    else:
        print(f"  kappa={kappa:8.3f}  {v.verdict}")
