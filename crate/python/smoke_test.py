"""Smoke test for the rislab Python extension.

Build the module first, e.g.

    cargo build --release -p rislab-py --features extension-module
    cp target/release/librislab.so python/rislab.so

or `maturin develop -m crates/python/Cargo.toml --features extension-module`.
"""

import json
import math
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

import rislab  # noqa: E402


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    r = rislab.Dissipation.scaled_norm(1.0)
    assert close(r([3.0, 4.0]), 5.0)
    assert close(r.dist_to_subdiff0([2.0, 0.0]), 1.0)

    poly = rislab.Dissipation.polyhedral([[-1.0, 0.0], [1.0, 0.0], [0.0, -1.0], [0.0, 1.0]])
    assert close(poly([1.0, 1.0]), 1.0)

    # Exact member of the first example is a local solution and a relaxed tuple.
    problem, tup, z = rislab.counterexample1(4)
    report = rislab.check_local(z, problem, 1e-8)
    assert report.passed, report.to_json()
    assert rislab.check_relaxed(tup, problem, 1e-8).passed
    json.loads(report.to_json())

    # Its limit state fails local stability checks once the load jumps.
    problem2, _, z2 = rislab.counterexample2(None)
    bad = rislab.check_local(z2, problem2, 1e-8)
    print("second example limit:", bad)

    tup_c, rep_c = rislab.construct_relaxed(z, problem, 1e-8)
    assert rep_c.passed and tup_c.s_end > problem.final_time

    times, states, tup_v = rislab.solve_viscous(problem, 1e-2)
    assert len(times) == len(states)
    err = tup_v.z_hat.sup_distance(tup_c.z_hat) if math.isclose(tup_v.s_end, tup_c.s_end, rel_tol=1e-2) else None
    print(f"viscous S = {tup_v.s_end:.4f}, constructed S = {tup_c.s_end:.4f}, z error {err}")

    energy = rislab.EnergyModel([[1.0]], b=[-1.0])
    load = rislab.Path.continuous([0.0, 1.0], [[0.0], [2.0]])
    custom = rislab.Problem(energy, rislab.Dissipation.scaled_norm(1.0), load, [0.0])
    _, _, tup_x = rislab.solve_viscous(custom, 1e-2, 1e-3)
    print("custom problem:", tup_x.z_hat)
    print("smoke test passed")


if __name__ == "__main__":
    main()
