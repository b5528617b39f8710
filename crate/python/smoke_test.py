"""Smoke test for the sqkd3 extension module.

Build and install first:  pip install --no-build-isolation ./crates/py
"""

import json
import math

import sqkd3


def main():
    physical = sqkd3.Conventions.physical()
    for variant in ("phi1", "phi2"):
        for model in ("dep", "indep"):
            r0 = sqkd3.key_rate(0.0, model=model, variant=variant, conventions=physical)["r"]
            assert abs(r0 - 1.0) < 1e-9, (variant, model, r0)

    expected = {("phi1", "dep"): 0.191, ("phi1", "indep"): 0.061, ("phi2", "dep"): 0.042, ("phi2", "indep"): 0.030}
    for (variant, model), want in expected.items():
        q = sqkd3.find_threshold(variant, model)
        assert abs(q - want) <= 0.005, (variant, model, q)
        print(f"threshold {variant}/{model}: {q:.4f}")

    report = sqkd3.key_rate(0.05)
    assert set(report) >= {"t", "X", "p_lower", "lambda1", "lambda2", "S_BEC", "S_EC_upper", "H_B_given_A", "r"}
    assert math.isclose(sum(report["t"]), 3.0, abs_tol=1e-12)

    attack = sqkd3.AttackModel.pauli_twirl(0.1)
    table = sqkd3.StatTable.from_attack(attack, "phi1")
    assert math.isclose(sum(table.t_values()), 3.0, abs_tol=1e-12)
    again = sqkd3.StatTable.from_json(table.to_json())
    assert again.p == table.p
    assert sqkd3.AttackModel.from_json(attack.to_json()).eve_dim == attack.eve_dim
    print("report from twirl statistics: r =", round(sqkd3.key_rate_from_table(table, physical)["r"], 6))

    sim = sqkd3.simulate(200_000, q=0.1, seed=7)
    assert sim["max_deviation_sigma"] < 5.0, sim["max_deviation_sigma"]
    assert sim == sqkd3.simulate(200_000, q=0.1, seed=7)
    print(f"simulation: max deviation {sim['max_deviation_sigma']:.2f} sigma")

    groups = sqkd3.verify()
    for g in groups:
        print(("PASS" if g["passed"] else "FAIL"), g["name"])
    assert all(g["passed"] for g in groups if g["name"] != "S(EC) inequality")

    ent = sqkd3.exact_entropies(attack)
    assert ent["s_b_given_e"] >= ent["s_b_given_ec"] - 1e-9
    json.dumps(ent)

    try:
        sqkd3.key_rate(0.5)
    except ValueError:
        pass
    else:
        raise AssertionError("Q outside [0, 3/8] must raise")
    print("smoke test passed")


if __name__ == "__main__":
    main()
