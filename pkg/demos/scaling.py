"""Large data become small data under dilation, and solves commute with it.

With s < 0 the dilated norm carries a factor 2^{s (lam - 1) eps0}, so an
integer scale factor can always push a datum below the contraction
threshold; solving the dilated problem and undoing the dilation then
reproduces the direct solve exactly on index-preserving grids.
"""
import numpy as np

from octantheat import (
    InitialDataKind,
    InitialDataSpec,
    Nonlinearity,
    NonlinearityKind,
    ProblemSpec,
    choose_lambda,
    make_grid,
    make_initial_data,
    picard_iterate,
    rescale_solution,
    scale_data,
    scaled_grid,
    scaling_vanishing_curve,
)

print("scale-factor selection for a large datum (norm 7, eps0 = 1, m = 2):")
plan = choose_lambda(7.0, s=-1.0, sigma=-1.5, m=2, eps0=1.0, C_fix=2.0)
print(f"  lam = {plan.lam}, rescaled weight index s0 = {plan.s0}, "
      f"criterion value {plan.smallness_margin:.2e} <= 1/100")

print("\nvanishing dilation curve at the balanced amplitude exponent:")
grid = make_grid(1, 4, 1 / 16)
f = make_initial_data(InitialDataSpec(InitialDataKind.EXP_HALFLINE), grid)
rep = scaling_vanishing_curve(f, sigma=0.0, s=-1.0)
for row in rep.curve:
    print(f"  lam={row['lam']:>2}: norm {row['norm']:.4e}")

print("\nround trip: dilate -> solve small -> undo the dilation")
m, lam = 2, 2
a = 2.0 / (m - 1)
base = make_grid(1, 4, 1 / 32)
v0 = make_initial_data(
    InitialDataSpec(InitialDataKind.OCTANT_BUMP, eps0=1.0, width=0.5,
                    amplitude=0.05), base)


def spec_for(g, T, eps0):
    return ProblemSpec(grid=g, nonlinearity=Nonlinearity(NonlinearityKind.POWER, m=m),
                       eps0=eps0, s=-1.0, T=T, nt=65, jmax=8, tol=0.0)


direct = picard_iterate(spec_for(base, 1.0, 1.0), v0)
lam_grid = scaled_grid(base, lam)
v0l = scale_data(v0, lam, a, out_grid=lam_grid)
small = picard_iterate(spec_for(lam_grid, 1.0 / lam**2, float(lam)), v0l)
back = rescale_solution(small.final, lam, a, out_grid=base)
err = np.abs(back.values - direct.final.values).max()
print(f"  max deviation from the direct solve: {err:.2e}")
