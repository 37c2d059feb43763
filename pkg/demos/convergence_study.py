"""Convergence ladders for the three manufactured cases.

Run ``python demos/convergence_study.py``.  Each case is solved on four nested
meshes and the fitted slopes of the relative errors are printed.
"""
from smoothext import bench

for name in bench.CASES:
    case = bench.make_case(name)
    rep = bench.run_convergence(case, 4)
    print(f"{name}  kappa={case.kappa:g}  lambda_h={case.schedule.C:g} h^{case.schedule.q:g}")
    for r in rep.levels:
        print(f"   h={r.h:.4f}  iters={r.iters:3d}  relL2={r.rel_l2:.4e}  relH1={r.rel_h1:.4e}")
    print(f"   slopes: L2 {rep.rate_l2.slope:.3f}  H1 {rep.rate_h1.slope:.3f}\n")
