#!/usr/bin/env python3
"""Smoke test for the `storsion` Python extension module.

Builds the module if needed, imports it from the cargo target
directory, and exercises one example of everything it exports:
Clifford arithmetic, cosphere moments, the density and ledger
reports, and the self-verification suites.

Run from anywhere:

    python3 python/smoke_test.py
"""

import json
import shutil
import subprocess
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def load_module():
    """Build (if needed) and import the extension module."""
    lib = None
    for profile in ("debug", "release"):
        candidate = REPO / "target" / profile / "libstorsion.so"
        if candidate.is_file():
            lib = candidate
            break
    if lib is None:
        subprocess.run(
            ["cargo", "build", "-p", "storsion-py"], cwd=REPO, check=True
        )
        lib = REPO / "target" / "debug" / "libstorsion.so"

    stage = Path(tempfile.mkdtemp(prefix="storsion-py-"))
    shutil.copy2(lib, stage / "storsion.so")
    sys.path.insert(0, str(stage))
    import storsion  # noqa: E402

    return storsion


def check_clifford(storsion):
    e1 = storsion.Clifford.generator(4, 1)
    e2 = storsion.Clifford.generator(4, 2)

    # Generators anticommute to the metric: e_i e_j + e_j e_i = -2δ_ij.
    assert (e1 * e2 + e2 * e1).is_zero()
    assert (e1 * e1) == storsion.Clifford.scalar(4, "-1")

    # Spinor trace: identity traces to 2^{n/2}, non-scalar words to 0.
    assert storsion.Clifford.identity(4).trace() == "4"
    assert (e1 * e2).trace() == "0"

    # Supertrace selection rule in dimension 4: only the top blade
    # survives, Str(e1 e2 e3 e4) = -4.
    top = e1
    for i in (2, 3, 4):
        top = top * storsion.Clifford.generator(4, i)
    assert top.supertrace() == "-4"
    assert e1.supertrace() == "0"

    # The grading element squares to one and anticommutes with vectors.
    g = storsion.Clifford.grading(4)
    assert g * g == storsion.Clifford.identity(4)
    assert (g * e1 + e1 * g).is_zero()

    # Vectors from rational components; blade coefficients round-trip.
    v = storsion.Clifford.vector(4, ["3/2", "0", "-1", "0"])
    assert v.coeff(0b0001) == "3/2"
    assert v.coeff(0b0100) == "-1"
    assert (-v + v).is_zero()

    # Dimension mismatches are Python errors, not crashes.
    try:
        e1 * storsion.Clifford.generator(6, 1)
    except ValueError:
        pass
    else:
        raise AssertionError("dimension mismatch should raise ValueError")

    print("ok clifford arithmetic")


def check_sphere(storsion):
    # <ξ_1²> = 1/n, <ξ_1⁴> = 3/(n(n+2)), <ξ_1²ξ_2²> = 1/(n(n+2)).
    assert storsion.sphere_average(4, [2, 0, 0, 0]) == "1/4"
    assert storsion.sphere_average(4, [4, 0, 0, 0]) == "1/8"
    assert storsion.sphere_average(4, [2, 2, 0, 0]) == "1/24"
    assert storsion.sphere_average(4, [1, 0, 0, 0]) == "0"
    assert storsion.sphere_average(6, [2, 0, 0, 0, 0, 0]) == "1/6"

    # Vol(S³) = 2π², Vol(S⁵) = π³.
    assert storsion.sphere_volume_in_pi_units(4) == "2"
    assert storsion.sphere_volume_in_pi_units(6) == "1"

    print("ok sphere moments")


FLAT_POINT = {
    "n": 4,
    "kind": "torsion",
    "f": {"value": "1", "grad": ["0", "0", "0", "0"]},
    "u": ["1", "0", "0", "0"],
    "v": ["0", "1", "0", "0"],
    "w": ["0", "0", "1", "0"],
    "T": [{"j": 1, "l": 2, "t": 3, "val": "1"}],
    "mode": "both",
}


def check_density(storsion):
    report = json.loads(storsion.density(json.dumps(FLAT_POINT)))
    assert report["tool"] == "storsion"
    by_mode = {d["mode"]: d for d in report["densities"]}

    # Flat factor, unit torsion triple: rows 3/2, (m-3)·3/2, -m·3/2
    # sum to -3 in both assembly modes.
    paper = by_mode["paper"]
    rows = {t["label"]: t["value"] for t in paper["terms"]}
    assert rows["I"] == "3/2"
    assert rows["II-a"] == "-3/2"
    assert rows["II-b"] == "-3"
    assert paper["total"] == "-3"
    assert by_mode["derived"]["total"] == "-3"

    # Numeric anchor: -3 · tr[id] · Vol(S³) = -24π² ≈ -236.87.
    import math

    expected = -24 * math.pi**2
    assert abs(paper["numeric_re"] - expected) <= 1e-9 * abs(expected)
    assert paper["numeric_im"] == 0.0

    # Exact strings are honest rationals.
    assert Fraction(paper["total"]) == -3

    # A mode override narrows the report to one section.
    only = json.loads(storsion.density(json.dumps(FLAT_POINT), mode="paper"))
    assert [d["mode"] for d in only["densities"]] == ["paper"]

    # Bad input is a ValueError naming the problem.
    try:
        storsion.density("{not json")
    except ValueError as err:
        assert "JSON" in str(err)
    else:
        raise AssertionError("malformed input should raise ValueError")

    print("ok density report")


def check_ledger(storsion):
    report = json.loads(storsion.ledger(json.dumps(FLAT_POINT)))
    section = report["ledger"]
    # At the flat point every printed value matches the engine exactly.
    assert section["paper_total"] == "-3"
    assert section["derived_total"] == "-3"
    for row in section["term_rows"] + section["total_rows"]:
        assert row["difference"] == "0", row

    markdown = storsion.ledger_markdown(json.dumps(FLAT_POINT))
    assert "| row |" in markdown and "II-b" in markdown

    print("ok ledger report")


def check_verify(storsion):
    report = json.loads(storsion.verify("traces", seed=11, trials=25))
    suite = report["suite"]
    assert suite["passed"] is True
    assert len(suite["checks"]) >= 6

    # Negative control: a zero tolerance is unsatisfiable by design.
    failing = json.loads(storsion.verify("oracle", trials=10, tolerance=0.0))
    assert failing["suite"]["passed"] is False

    print("ok verification suites")


def main():
    storsion = load_module()
    check_clifford(storsion)
    check_sphere(storsion)
    check_density(storsion)
    check_ledger(storsion)
    check_verify(storsion)
    print("smoke test passed")


if __name__ == "__main__":
    main()
