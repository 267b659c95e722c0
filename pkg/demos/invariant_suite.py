"""The discrete invariant ledger, checked live while a run progresses.

Every property the scheme is engineered to preserve is monitored here with
its tolerance:

  mass monotonicity      d/dt (integral of n) <= 0
  difference conservation  integral of n - m constant to round-off
  maximum principles     sup m nonincreasing; sup c <= max(sup c0, sup m0)
  L2 dissipation of m    ||m||^2 + 2 int ||grad m||^2 <= ||m0||^2
  reaction budget        cumulative fertilization <= min(mass n0, mass m0)

Run:  python3 demos/invariant_suite.py
"""

from cksf import (
    Grid2D,
    PoissonWorkspace,
    SimParams,
    Tolerances,
    TwoBlobs,
    assert_invariants,
    compute_record,
    make_initial_state,
    step,
)

grid = Grid2D(32, 32)
params = SimParams(alpha=-0.6, kappa=0.0, t_end=0.3)
state = make_initial_state(grid, TwoBlobs(), params)
ws = PoissonWorkspace(grid, params.poisson_tol)

rec = compute_record(state)
tol = Tolerances(rec)
violations = 0
print(f"{'step':>5} {'mass_n':>10} {'sup_m':>8} {'sup_c':>8} "
      f"{'diss. budget':>13} {'violations':>10}")
while state.t < params.t_end - 1e-12:
    state, _ = step(state, params, ws)
    prev, rec = rec, compute_record(state, rec)
    found = assert_invariants(rec, prev, tol)
    violations += len(found)
    for v in found:
        print("  VIOLATION", v)
    if state.step_index % 60 == 0:
        budget = rec.l2_m_sq + rec.cum_grad_m
        print(f"{state.step_index:>5} {rec.mass_n:>10.6f} {rec.sup_m:>8.4f} "
              f"{rec.sup_c:>8.5f} {budget:>13.6f} {violations:>10}")

print(f"\n{state.step_index} steps, {violations} violations")
print(f"dissipation budget {rec.l2_m_sq + rec.cum_grad_m:.6f} "
      f"<= initial ||m||^2 = {tol.initial.l2_m_sq:.6f}")
assert violations == 0
