"""Release acceptance gate.

Each test drives one released guarantee end to end through the verify
suites (the CLI run at the end exercises the full stack in a subprocess)
and prints a single pass/fail line, so the gate output reads as a
checklist.  Tolerances live in the suites themselves; nothing here
loosens them.
"""
import subprocess
import sys
import time

import pytest

from rlimited import verify as verify_mod

CRITERIA = [
    ("criterion-01", "moments",
     "1D rules reproduce interval and radial moment tables"),
    ("criterion-02", "cascade",
     "band cascade reaches the reduced band and matches the direct rule"),
    ("criterion-03", "lattice",
     "lattice periodization leaves the cosine expansion invariant"),
    ("criterion-04", "uniform-sampling",
     "periodized sinc peak height and decay slope"),
    ("criterion-05", "prolate",
     "concentration eigenvalues factor through the frame weights"),
    ("criterion-06", "eigen-count",
     "count of well-concentrated modes matches the area heuristic"),
    ("criterion-07", "projection",
     "discrete projections land within their stated error bounds"),
    ("criterion-08", "nyquist",
     "delta trains at critical spacing are recovered exactly"),
    ("criterion-09", "triangle-kernel",
     "triangle kernel closed form, refinement, and inversion agree"),
    ("criterion-10", "symmetry",
     "symmetry-adapted rules keep group invariance"),
    ("criterion-11", "cone-ball",
     "cone and ball kernels match their least-squares surrogates"),
]


def _report(tag: str, desc: str, ok: bool, detail: str = "") -> None:
    line = "[%s] %s  %s" % ("PASS" if ok else "FAIL", tag, desc)
    if detail:
        line += "  (%s)" % detail
    print(line)


@pytest.mark.parametrize("tag,suite,desc", CRITERIA,
                         ids=[c[0] for c in CRITERIA])
def test_criterion(tag, suite, desc):
    rows = verify_mod.SUITES[suite]()
    bad = [r for r in rows if not r["pass"]]
    worst = max(rows, key=lambda r: (r["value_measured"]
                                     / max(r["bound_claimed"], 1e-300)))
    detail = "%d checks, worst %.2e vs bound %.2e" \
        % (len(rows), worst["value_measured"], worst["bound_claimed"])
    _report(tag, desc, not bad, detail)
    assert not bad, "%s failed: %s" % (tag, [r["name"] for r in bad])


def test_criterion_12_cli_verify_runs_clean(tmp_path):
    t0 = time.time()
    proc = subprocess.run(
        [sys.executable, "-m", "rlimited.cli", "verify",
         "--out", str(tmp_path)],
        capture_output=True, text=True, timeout=600)
    took = time.time() - t0
    ok = proc.returncode == 0 and took < 600.0
    _report("criterion-12", "verification CLI finishes clean in budget",
            ok, "exit %d in %.1f s" % (proc.returncode, took))
    assert proc.returncode == 0, proc.stdout + proc.stderr
    assert took < 600.0
    assert (tmp_path / "verify_report.json").exists()
