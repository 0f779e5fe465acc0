"""Smoke test for the pyehrelay extension module.

Build and install first, e.g. `pip install ./crates/python`, then run
`python python/smoke_test.py`.
"""

import math

import pyehrelay as eh


def main():
    # E1(1) and Ei(1) reference values
    assert abs(eh.e1(1.0) - 0.21938393439552029) < 1e-14
    assert abs(eh.ei(1.0) - 1.8951178163559368) < 1e-13

    sys = eh.SystemParams.from_geometry()
    assert abs(sys.gamma_th() - 7.0) < 1e-12
    b = eh.breakdown(sys)
    assert abs(b.p1 + b.p2 + b.p3 + b.q1 - 1.0) < 1e-12
    assert abs(b.tau - (0.5 * sys.rs * b.q1 + sys.rs * b.q2)) < 1e-12

    rho = eh.rho_star(sys)
    assert abs(rho - 0.87) < 0.02, rho
    assert eh.rho_star_no_direct(sys) > rho

    mc = eh.mc_estimate(sys.with_rho(rho), trials=400_000, seed=7)
    exact = eh.breakdown(sys.with_rho(rho)).tau
    assert abs(mc.mean - exact) < 0.02, (mc.mean, exact)
    assert mc.std_error > 0 and math.isfinite(mc.std_error)

    r = eh.maximize_rho(sys, "tau_full")
    assert 0.80 < r.arg_opt < 0.90 and not r.grid_fallback
    rs = eh.maximize_rs(sys)
    assert 0.5 < rs.arg_opt < 8.0

    try:
        eh.SystemParams.from_geometry(rho=1.5)
    except ValueError:
        pass
    else:
        raise AssertionError("rho=1.5 accepted")

    print(b)
    print(mc)
    print(r)
    print("smoke test passed")


if __name__ == "__main__":
    main()
