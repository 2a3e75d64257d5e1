"""Smoke test for the cohomflow Python module.

Build first:  pip install -e crates/py --no-build-isolation
"""

import json
import math

import cohomflow as cf


def main():
    names = {e["name"]: e for e in cf.catalog()}
    assert "bbc-case5" in names

    cfg = cf.Configuration.builtin("bbc-case5")
    assert cfg.r == 3 and cfg.n == 5 and cfg.e == "1"
    res = cf.search(cfg)
    assert len(res) == 2 and not res.partial
    for f in res.found:
        assert cf.check(cfg, f)["satisfied"]
        assert cf.hamiltonian_on_graph(cfg, f) == "0"

    # round trip through JSON
    f0 = cf.Ansatz.from_json(json.dumps(res.found[0].to_json()))
    assert f0.exponents() == res.found[0].exponents()

    # perturbed A: the same ansatz no longer satisfies the condition
    bad = cf.Configuration(
        [1, 2, 2],
        [([0, -1, 0], "4"), ([0, 0, -1], "4"), ([1, -2, 0], "-3/4"), ([1, 0, -2], "-1/2")],
        "1",
        "0",
    )
    rep = cf.check(bad, f0)
    assert not rep["satisfied"] and rep["violated_b"]

    try:
        cf.Configuration([4], [([-1], "1/0")])
    except ValueError:
        pass
    else:
        raise AssertionError("1/0 accepted")

    b5 = cf.Configuration.builtin("bryant5")
    gfi = cf.verify_gfi(b5, "builtin:bryant-difference")
    assert gfi["is_gfi"], gfi
    print("Bryant n=4 quotient:", gfi["phi"])

    assert cf.factor_j(cf.Configuration([4], [], "1"))["feasible"]
    assert not cf.factor_j(cf.Configuration([2, 3], [], "1"))["feasible"]
    assert [n for n in range(2, 26) if cf.two_vector_exponents(n)["s"] == "2"] == [4]

    c5 = cf.Configuration(
        [1, 2, 2],
        [([0, -1, 0], "4"), ([0, 0, -1], "4"), ([1, -2, 0], "-1/2"), ([1, 0, -2], "-1/2")],
        "8",
    )
    rows = cf.integrate_case5(c5, s0=1e-6, s_max=10.0)
    s, b1, b2, u = rows[-1]
    assert s == 10.0
    assert abs(b1 - 10.0) < 1e-8 * 10 and abs(b2 - 11.0) < 1e-8 * 11 and abs(u + 20.0) < 1e-8 * 20

    sol = cf.ClosedFormCase5(8.0)
    t = sol.t_of_s(1.0)
    assert abs(t - cf.t_of_s(1.0, 4.0, 8.0)) < 1e-15
    assert abs(sol.s_of_t(t) - 1.0) < 1e-12
    assert abs(sol.g1(t) - 1.0) < 1e-12
    assert sol.smoothness()["pass"]
    assert not cf.ClosedFormCase5(8.0, a=-1.0).smoothness()["pass"]

    b5f = cf.search(b5).found[0]
    ok = cf.full_flow_check(b5, b5f, [0.0, 0.0], 0.0, 3.0)
    assert ok["max_abs_hamiltonian"] < 1e-8 and ok["max_graph_defect"] < 1e-7
    off = cf.full_flow_check(b5, b5f, [0.0, 0.0], 0.0, 3.0, p_offset=[1e-3, 1e-3])
    assert off["max_graph_defect"] > 1e-7

    n1 = cf.bryant_n1(1.0, 2.0, 0.0, 10.0)
    assert n1["second_order_residual"] < 1e-8
    assert abs(n1["samples"][-1][1] - math.sqrt(2.0)) < 1e-5

    print("cohomflow", cf.__version__, "smoke test passed")


if __name__ == "__main__":
    main()
