#!/usr/bin/env python3
"""End-to-end checks of the srprofile CLI: exit codes, schema, seed precedence, determinism."""
import argparse
import json
import os
import pathlib
import subprocess
import sys

import jsonschema

failures = []


def check(ok, what):
    print(("ok   " if ok else "FAIL ") + what)
    if not ok:
        failures.append(what)


def run(cli, args, env=None):
    full_env = dict(os.environ)
    full_env.pop("SRPROFILE_SEED", None)
    full_env.update(env or {})
    return subprocess.run([cli] + args, capture_output=True, text=True, env=full_env)


def validate_dir(validator, directory):
    files = sorted(pathlib.Path(directory).glob("*.json"))
    for f in files:
        errors = sorted(validator.iter_errors(json.loads(f.read_text())), key=str)
        check(not errors, f"schema {f.name}" + (f": {errors[0].message}" if errors else ""))
    return len(files)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--cli")
    ap.add_argument("--schema", required=True)
    ap.add_argument("--workdir")
    ap.add_argument("--validate", nargs="*", default=[], help="only validate the JSON files in these directories")
    a = ap.parse_args()

    validator = jsonschema.Draft7Validator(json.loads(pathlib.Path(a.schema).read_text()))
    if a.validate:
        count = sum(validate_dir(validator, d) for d in a.validate)
        check(count > 0, f"found {count} artifacts to validate")
        return report()

    work = pathlib.Path(a.workdir)
    work.mkdir(parents=True, exist_ok=True)
    out = str(work / "out")
    cli = a.cli

    r = run(cli, ["jacobi", "--geometry", "heisenberg", "-o", out, "--run-id", "j"])
    check(r.returncode == 0 and json.loads(r.stdout)["result"]["defect"] == 0.0, "jacobi heisenberg defect 0")

    r = run(cli, ["classify", "--params", "e=1,a=0.3,c=0.7", "--isotropy", "-o", out, "--run-id", "c"])
    check(r.returncode == 0 and json.loads(r.stdout)["result"]["class"] == "NonGroupFamily", "classify non-group")

    r = run(cli, ["nilpotentize", "-g", "so3", "-o", out, "--run-id", "n"])
    check(r.returncode == 0 and json.loads(r.stdout)["result"]["step"] == 2, "nilpotentize so3 is step 2")

    r = run(cli, ["ccdist", "-g", "heisenberg", "--to", "1,0,0", "-o", out, "--run-id", "d"])
    check(r.returncode == 0 and abs(json.loads(r.stdout)["result"]["distance"] - 1.0) < 1e-3, "ccdist heisenberg unit")

    r = run(cli, ["ballnet", "-g", "heisenberg", "--net-h", "0.3", "--max-points", "30", "-o", out, "--run-id", "b"])
    check(r.returncode == 0, "ballnet runs")
    csv = os.path.join(out, "b_ballnet.csv")
    r = run(cli, ["gh", "--x", csv, "--y", csv, "-o", out, "--run-id", "g"])
    check(r.returncode == 0 and json.loads(r.stdout)["result"]["upper"] == 0.0, "ballnet CSV re-ingested by gh at distance 0")

    r = run(cli, ["rigidity", "--g1", "so3", "--g2", "sl2r", "--eps", "0.2", "--pairs", "1", "--segments", "20",
                  "-o", out, "--run-id", "r"])
    rows = json.loads(r.stdout)["result"]["rows"] if r.returncode == 0 else []
    check(len(rows) == 1 and rows[0]["delta"] > 0 and os.path.exists(os.path.join(out, "r_rigidity.csv")),
          "rigidity so3 vs sl2r writes a CSV row")

    r = run(cli, ["profile", "-g", "heisenberg", "-o", out, "--run-id", "empty"])
    res = json.loads(r.stdout)["result"] if r.returncode == 0 else {}
    check(res.get("slices") == [], "empty profile run has empty slice array")

    prof = ["profile", "-g", "heisenberg", "--eps", "1,0.5", "--net-h", "0.3", "--max-points", "30"]
    r1 = run(cli, prof + ["-o", str(work / "p1"), "--run-id", "p"])
    r2 = run(cli, prof + ["-o", str(work / "p2"), "--run-id", "p"])
    check(r1.returncode == 0 and r2.returncode == 0, "profile runs")
    names = ["p_profile.json", "p_ambient_1.csv", "p_ambient_0.5.csv", "p_limit.csv"]
    check(all((work / "p1" / n).exists() for n in names), "profile artifact names")
    same = all((work / "p1" / n).read_bytes() == (work / "p2" / n).read_bytes() for n in names[1:])
    s1 = json.loads((work / "p1" / "p_profile.json").read_text())
    s2 = json.loads((work / "p2" / "p_profile.json").read_text())
    s1["config"]["output_dir"] = s2["config"]["output_dir"] = ""
    check(same and s1 == s2, "profile rerun is identical")
    r3 = run(cli, prof + ["-o", str(work / "p1"), "--run-id", "p"])
    check(r3.stdout == r1.stdout, "profile rerun summary is byte-identical")

    cfg = work / "cfg.json"
    cfg.write_text(json.dumps({"command": "jacobi", "geometry": "so3", "solver": {"seed": 5}}))
    seed = lambda r: json.loads(r.stdout)["config"]["solver"]["seed"]
    r = run(cli, ["jacobi", "--config", str(cfg), "-o", out])
    check(r.returncode == 0 and seed(r) == 5 and json.loads(r.stdout)["config"]["geometry"] == "so3", "config file applied")
    r = run(cli, ["jacobi", "--config", str(cfg), "-o", out], {"SRPROFILE_SEED": "7"})
    check(r.returncode == 0 and seed(r) == 7, "SRPROFILE_SEED overrides config file")
    r = run(cli, ["jacobi", "--config", str(cfg), "--seed", "9", "-o", out], {"SRPROFILE_SEED": "7"})
    check(r.returncode == 0 and seed(r) == 9, "--seed overrides SRPROFILE_SEED")

    r = run(cli, ["jacobi", "--geometry", "nosuch", "-o", out])
    check(r.returncode == 2 and "heisenberg" in r.stderr, "unknown geometry exits 2 naming the catalog")
    r = run(cli, ["profile", "-g", "heisenberg", "--eps", "0.5,1", "-o", out])
    check(r.returncode == 2, "increasing eps grid exits 2")
    r = run(cli, ["jacobi", "--threads", "0", "-o", out])
    check(r.returncode == 2, "zero threads exits 2")
    bad = work / "bad.json"
    bad.write_text(json.dumps({"command": "jacobi", "bogus": 1}))
    r = run(cli, ["jacobi", "--config", str(bad), "-o", out])
    check(r.returncode == 2, "unknown config key exits 2")
    r = run(cli, ["ccdist", "-g", "heisenberg", "--to", "1,0,0", "--max-iter", "1", "--tol", "1e-9", "-o", out])
    check(r.returncode == 3, f"starved solver exits 3 (got {r.returncode})")
    blocker = work / "blocker"
    blocker.write_text("x")
    r = run(cli, ["jacobi", "-o", str(blocker / "sub")])
    check(r.returncode == 4, "unwritable output dir exits 4")
    r = run(cli, ["gh", "--x", str(work / "missing.csv"), "--y", csv, "-o", out])
    check(r.returncode == 4, "missing input exits 4")

    validate_dir(validator, out)
    validate_dir(validator, work / "p1")
    return report()


def report():
    print(f"{len(failures)} failure(s)")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
