"""Smoke test for the g2inv Python extension.

Build and install first, e.g. `pip install crates/g2inv-py` or
`maturin develop -m crates/g2inv-py/Cargo.toml`, then run this file.
"""

import json
import math

import g2inv


def close(a, b, tol):
    return abs(a - b) <= tol * max(abs(a), abs(b), 1.0)


def main():
    assert "vdb" in g2inv.catalog_names()

    vdb = g2inv.Metric.catalog("vdb")
    six = vdb.fundamentals(0.5, 1.0)
    assert close(six[0], -1.9558210814143801, 1e-12), six
    assert close(six[4], 0.56721320521627168, 1e-12), six

    report = vdb.invariants(0.5, 1.0, order=2)
    assert report["flags"]["generic"] is True
    assert math.isfinite(report["second"]["C_ric"])

    assert vdb.einstein_residual(0.5, 1.0) > 1e-6
    lk = g2inv.Metric.catalog("lambda_kundu", {"c": 1.0, "Lambda": 3.0})
    assert lk.einstein_residual(1.0, 0.0, cosmological=3.0) < 1e-12

    for name, residual, skipped in vdb.relations(0.5, 1.0, suite="first"):
        assert skipped or abs(residual) < 1e-8, (name, residual)

    t = g2inv.Transform("t1 + 0.1*t2^2", "t2", "sin(t1)", "0", [[2.0, 1.0], [0.0, 1.0]])
    moved = vdb.transformed(t)
    moved_six = moved.fundamentals(0.5, 1.0)
    for a, b in zip(six, moved_six):
        assert close(a, b, 1e-9), (a, b)
    again = g2inv.Metric.from_json(moved.to_json())
    assert json.loads(again.to_json()) == json.loads(moved.to_json())

    assert g2inv.compare(vdb, moved)["verdict"] == "Consistent"
    assert g2inv.compare(vdb, lk)["verdict"] != "Consistent"
    assert g2inv.characterize_vdb(vdb)
    assert not g2inv.characterize_vdb(lk)

    assert g2inv.rank("fundamental6", 1) == 6

    try:
        g2inv.Metric.catalog("nosuch")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown catalog name accepted")

    print("g2inv python smoke test: ok")


if __name__ == "__main__":
    main()
