"""Smoke test for the dstab_py extension module.

Build and put the module on the path first, e.g.

    cargo build --release -p dstab-py --features extension-module
    cp target/release/libdstab_py.so python/dstab_py.so
    python3 python/smoke_test.py
"""

import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import dstab_py as d  # noqa: E402


def main() -> None:
    assert d.count_sl2_with_fixed_points(3) == 9
    assert d.delta_theoretical(5) == (19, 24)

    e = d.EllipticCurve.named("571a1")
    assert e.conductor == 571
    n = e.count_points(101)
    assert abs(n - 102) <= 2 * math.sqrt(101)
    assert e.an(12)[0] == 1

    rec = d.classify_prime(e, 3, 7)
    assert rec["in_q"] and rec["level"] is not None

    assert d.count_cyclic_fields(3, 82) == 2
    assert len(d.characters_of_order(7, 3)) == 2
    field = d.build_s_ramified_character([7, 13], [], 3)
    assert field["conductor"] == 91

    re, im = d.gauss_sum(7, 0, 3)
    assert abs(re * re + im * im - 7) < 1e-8

    assert d.hilbert_symbol(-1, -1, "inf") == -1
    assert d.hilbert_symbol(-1, -1, 2) == -1
    inv = d.conic_invariants(1, 1, 1)
    assert sorted(map(str, inv["ramified"])) == ["2", "inf"]
    assert not d.member_quadratic(1, 1, 1, 7)
    assert d.member_quadratic(1, 1, 1, -1)
    assert d.find_conic_point(1, 1, 1, -1, 1) is not None

    assert d.search_point([-19, 112, -142, -68, -7], 17, 40) is not None

    failed = [c for c in d.selftest() if not c["passed"]]
    assert not failed, failed
    print("python smoke test passed")


if __name__ == "__main__":
    main()
