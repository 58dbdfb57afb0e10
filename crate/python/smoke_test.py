"""Smoke test for the omnicrawl extension module.

Build and install first:
    pip install maturin
    pip install --no-build-isolation -e crates/py
"""

import math

import omnicrawl as oc

params = oc.RobotParams.table_i()
scenario = oc.PipeScenario(0.075, 0.7)

theta1, theta2 = oc.posture(params, scenario)
assert abs(theta1 + theta2 - 180.0) < 1e-9
assert abs(theta1 - 114.6243) < 1e-4, theta1

sol = oc.optimize_torques(params, scenario)
assert abs(sum(sol.friction_forces) - params.total_weight()) < 1e-8
assert abs(sol.objective - sum(abs(t) for t in sol.joint_torques)) < 1e-12
print("torques [N m]:", [round(t, 4) for t in sol.joint_torques], "sum", round(sol.objective, 4))

report = oc.check_state(sol.state_vector(), params, scenario)
assert report["pass"], report

zeros = oc.check_state([0.0] * 10, params, scenario)
fy = dict(zeros["equality_residuals"])["sum_fy"]
assert not zeros["pass"] and abs(abs(fy) - 4.8069) < 1e-9

margin = oc.climb_margin(sol, params)
assert margin["min_slip_margin"] > -1e-9

k = oc.stiffness([0.2359, 0.3683, 0.2760, 0.1310], params, scenario)["stiffness"]
assert all(math.isclose(a, b, rel_tol=1e-9) for a, b in zip(k, [0.0096, 0.0056, 0.0042, 0.0053])), k

rows = oc.feasibility_sweep(params, (0.065, 0.10, 10), (0.3, 0.9, 10))
assert len(rows) == 100 and all(r[2] == "Feasible" for r in rows)

cmp = oc.compare_with_lp(params, scenario, points_per_axis=51)
assert cmp["agree"], cmp

variants = oc.variant_report(params, scenario)
assert set(variants) == {"as_printed", "symmetry_corrected"}

try:
    oc.optimize_torques(params, oc.PipeScenario(0.075, 0.0))
except oc.NoStaticEquilibrium as e:
    print("mu = 0:", e)
else:
    raise AssertionError("expected NoStaticEquilibrium")

try:
    oc.PipeScenario(0.075, 0.7, equation_variant="bogus")
except ValueError:
    pass
else:
    raise AssertionError("expected ValueError")

print("smoke test passed")
