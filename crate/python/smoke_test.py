#!/usr/bin/env python3
"""Smoke test for the frobound_py extension module.

Builds the cdylib if needed, stages it under an importable name, and
exercises the main entry points against known values.

Usage: python3 python/smoke_test.py [--skip-build]
"""
import shutil
import subprocess
import sys
import sysconfig
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def build_and_stage(skip_build: bool) -> Path:
    if not skip_build:
        subprocess.run(
            ["cargo", "build", "--release", "-p", "frobound-py"],
            cwd=ROOT,
            check=True,
        )
    lib = ROOT / "target" / "release" / "libfrobound_py.so"
    if not lib.exists():  # macOS fallback
        lib = ROOT / "target" / "release" / "libfrobound_py.dylib"
    if not lib.exists():
        sys.exit(f"built library not found under {ROOT / 'target' / 'release'}")
    stage = Path(tempfile.mkdtemp(prefix="frobound-py-"))
    suffix = sysconfig.get_config_var("EXT_SUFFIX") or ".so"
    shutil.copy2(lib, stage / f"frobound_py{suffix}")
    return stage


def main() -> None:
    skip_build = "--skip-build" in sys.argv[1:]
    stage = build_and_stage(skip_build)
    sys.path.insert(0, str(stage))
    import frobound_py as fb

    print(f"frobound_py {fb.__version__}")

    # exponents of the built-in family
    exps = fb.exponents(3)
    by_z = {row["z"]: row for row in exps}
    assert by_z["2"]["exponents"] == ["-1/4", "1/4"], by_z
    assert by_z["-2"]["exponents"] == ["0", "0"], by_z
    assert all(row["hypotheses_pass"] for row in exps)
    print("exponents: ok")

    # bound calculus
    assert fb.g_value(3, 3) == 3
    assert fb.g_value(3, 1) == 0
    assert [fb.alpha1(["-1/4", "1/4"], p) for p in (3, 5, 7, 11, 13)] == [1, 1, 2, 3, 3]
    rows = fb.bounds(3, 4)
    minus2 = [r for r in rows if r["z"] == "-2"]
    assert [r["bound"] for r in minus2] == [0, -3, -9, -12], minus2
    print("bounds: ok")

    # fiber matrix against the point-count trace
    fib = fb.fiber(3, m=6)
    assert fib["a_p"] == -2, fib
    assert fib["v_phi0"] == "0" and fib["v_phi0_inv"] == "-1", fib
    assert fb.fiber(5, m=6)["a_p"] == -2
    assert fb.fiber(7, m=6)["a_p"] == -4
    print("fiber: ok")

    # small deformation run with order measurement
    res = fb.deform_and_measure(3, 4, 128)
    assert res["residual_valuation"].startswith(">="), res
    got = {(r["z"], r["m"]): r["measured_order"] for r in res["rows"]}
    assert got[("2", 1)] == 1 and got[("2", 2)] == -2 and got[("2", 3)] == -5
    assert got[("-2", 2)] == -3 and got[("-2", 3)] == -9
    assert all(r["measured_order"] >= r["bound"] for r in res["rows"])
    print("deform_and_measure: ok")

    print("smoke test passed")


if __name__ == "__main__":
    main()
