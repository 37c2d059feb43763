"""How the regularization weight caps accuracy on the flat case near kappa = -1.

The reference control that reproduces the exact solution has a large norm
because the contrast sits next to -1.  With lambda_h = 0.002 h^2 the penalty on
that norm outweighs the misfit at these mesh sizes, so the error stalls.  A much
smaller constant lets the discretization error show through.
"""
from smoothext import bench, optimize, transmission as tm
from smoothext.mesh import generate_square_split

case = bench.case_flat()
ops = tm.prepare(case.problem(), generate_square_split(16))
ref = tm.reference_control(ops, case.exact)
print(f"reference control norm at n=16: {tm.control_norm(ops, ref):.1f}")

for C in (2e-3, 1e-6, 1e-9):
    sched = optimize.Schedule(C, 2.0)
    rep = bench.run_convergence(bench.case_flat(schedule=sched), 4)
    errs = "  ".join(f"{e:.3e}" for e in rep.errors("l2"))
    print(f"C={C:.0e}  relL2: {errs}  slope {rep.rate_l2.slope:.2f}")
