#!/usr/bin/env python3
"""Solve an MPS file with HiGHS and write "name value" lines.

Usable as an external solver for zenagg:
    zenagg solve ... --external "python3 tools/highs_solve.py {mps} {sol}"

With --self-test ZENAGG the script cross-checks the embedded solver against
HiGHS on small models and exits 77 when highspy is not installed.
"""

import argparse
import os
import re
import subprocess
import sys
import tempfile


def solve(mps, sol, gap=1e-9):
    import highspy

    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("mip_rel_gap", gap)
    h.setOptionValue("threads", 1)
    h.setOptionValue("random_seed", 0)
    if h.readModel(mps) != highspy.HighsStatus.kOk:
        raise RuntimeError(f"HiGHS could not read {mps}")
    h.run()
    status = h.getModelStatus()
    if status != highspy.HighsModelStatus.kOptimal:
        return status, None
    lp = h.getLp()
    values = h.getSolution().col_value
    with open(sol, "w") as out:
        for name, v in zip(lp.col_names_, values):
            out.write(f"{name} {v:.17g}\n")
    return status, h.getInfo().objective_function_value


def run(cmd):
    return subprocess.run(cmd, capture_output=True, text=True)


def self_test(zenagg):
    try:
        import highspy  # noqa: F401
    except ImportError:
        print("highspy not installed, skipping")
        return 77

    cases = [
        ["--horizon", "48", "--buildings", "1", "--k", "2", "--variant", "M1", "--simplified"],
        ["--horizon", "48", "--buildings", "2", "--k", "2", "--variant", "M0", "--simplified"],
        ["--horizon", "72", "--buildings", "1", "--granularity", "hours", "--k", "12", "--variant", "M1"],
    ]
    failures = 0
    with tempfile.TemporaryDirectory() as tmp:
        for i, args in enumerate(cases):
            mps = os.path.join(tmp, f"m{i}.mps")
            sol = os.path.join(tmp, f"m{i}.sol")
            r = run([zenagg, "solve", *args, "--gap", "1e-9", "--export", mps])
            m = re.search(r"status optimal objective (\S+)", r.stdout)
            if r.returncode != 0 or not m:
                print(f"case {i}: embedded solve failed\n{r.stdout}{r.stderr}")
                failures += 1
                continue
            embedded = float(m.group(1))
            status, highs = solve(mps, sol)
            if highs is None:
                print(f"case {i}: HiGHS status {status}")
                failures += 1
                continue
            rel = abs(embedded - highs) / max(1.0, abs(highs))
            ok = rel <= 1e-6
            failures += not ok
            print(f"case {i}: embedded {embedded:.10g} HiGHS {highs:.10g} rel diff {rel:.2e} {'ok' if ok else 'MISMATCH'}")

        # HiGHS through the external adapter, checked by zenagg's verifier.
        script = os.path.abspath(__file__)
        cmd = f"{sys.executable} {script} {{mps}} {{sol}}"
        catalog = os.path.join(os.path.dirname(script), "..", "data", "catalog.json")
        r = subprocess.run([zenagg, "solve", *cases[0], "--catalog", catalog, "--external", cmd],
                           capture_output=True, text=True, cwd=tmp)
        ok = r.returncode == 0 and "solution check: passed" in r.stdout
        failures += not ok
        print(f"external adapter: {'ok' if ok else 'FAILED'}")
        if not ok:
            print(r.stdout + r.stderr)
    return 1 if failures else 0


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("mps", nargs="?")
    p.add_argument("sol", nargs="?")
    p.add_argument("--gap", type=float, default=1e-9)
    p.add_argument("--self-test", metavar="ZENAGG")
    a = p.parse_args()
    if a.self_test:
        return self_test(a.self_test)
    if not a.mps or not a.sol:
        p.error("mps and sol are required")
    status, obj = solve(a.mps, a.sol, a.gap)
    if obj is None:
        print(f"HiGHS status {status}", file=sys.stderr)
        return 1
    print(f"objective {obj:.17g}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
