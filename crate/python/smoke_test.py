#!/usr/bin/env python3
"""Smoke test for the gsup_py extension module.

Builds the cdylib with cargo if needed, loads it without any packaging
machinery, and exercises the main entry points on tiny inputs.

Usage: python3 python/smoke_test.py [--release]
"""
import math
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def build_and_import(release: bool):
    profile = "release" if release else "debug"
    cmd = ["cargo", "build", "-p", "gsup-py"]
    if release:
        cmd.append("--release")
    subprocess.run(cmd, cwd=ROOT, check=True)
    lib = ROOT / "target" / profile / "libgsup_py.so"
    if not lib.exists():  # macOS fallback
        lib = ROOT / "target" / profile / "libgsup_py.dylib"
    stage = Path(tempfile.mkdtemp(prefix="gsup_py_"))
    shutil.copy(lib, stage / "gsup_py.so")
    sys.path.insert(0, str(stage))
    import gsup_py

    return gsup_py


def main():
    g = build_and_import("--release" in sys.argv[1:])

    # scalar primitives
    assert g.q_exp(0.0, 0.5) == 1.0
    assert abs(g.q_exp(-1.0, 0.5) - 0.25) < 1e-15
    assert g.q_exp(-3.0, 0.5) == 0.0
    assert g.weight(0.0, 0.025, 1.0) == 1.0
    assert g.weight(2.0, 0.5, 1.0) == 0.0
    s, tau = g.to_tuning(1.0, 0.5, 1.0)
    assert abs(s - 1.0) < 1e-12 and abs(tau - 2.0) < 1e-12
    pdf0 = g.q_gaussian_pdf([0.0], 1.0, [0.0], 1.0)
    assert abs(pdf0 - 1.0 / math.sqrt(2 * math.pi)) < 1e-12

    # generators + clustering
    data, labels = g.gen_mixture(4.0, 0.8, 100, 7)
    assert len(data) == 100 and len(labels) == 100
    res = g.gamma_sup(data, 0.025, 0.8)
    assert res.converged and 1 <= res.k <= 12
    again = g.gamma_sup(data, 0.025, 0.8)
    assert res.labels == again.labels, "gamma_sup must be deterministic"

    nb = g.gamma_nonblurring(data, 0.025, 0.8)
    assert nb.k >= 1
    plus = g.gamma_sup_plus(data, 0.025, 0.8, size_threshold=60)
    assert max(plus.sizes) <= 60 or plus.k == res.k

    km = g.kmeans(data, 4, seed=3)
    assert km.k == 4 and sum(km.sizes) == 100
    kp = g.kmeans_plus(data, 4, seed=3, dismiss_threshold=5)
    assert kp.k == 4
    sel_k, gaps, se = g.gap_statistic(data, 6, 5, seed=1)
    assert 1 <= sel_k <= 6 and len(gaps) == 6 and len(se) == 6

    # metrics
    assert g.purity_number([1, 1, 2, 2], [5, 5, 5, 6]) == 3
    assert g.impurity([1, 1, 2, 2], [5, 5, 5, 6]) == 1
    assert g.c_impurity([1, 1, 2, 2], [5, 5, 5, 6]) == 1

    # tau scan on the toy set
    toy, toy_labels = g.gen_toy(1)
    assert len(toy) == 40 and toy_labels.count(2) == 20
    scan = g.scan_tau(toy, 0.025, grid_count=12)
    assert len(scan["taus"]) == 12 and len(scan["counts"]) == 12

    # reducers
    proj, ratios = g.pca(data, 2)
    assert len(proj) == 100 and len(proj[0]) == 2 and len(ratios) == 2
    sim = g.gen_images(4, 16, 24, sigma_eps=0.5, misalign_frac=0.0, seed=2)
    assert len(sim["data"]) == 24 and sim["realized_snr"] > 0
    core = g.mpca(sim["data"], 16, 16, 4, 4)
    assert len(core) == 24 and len(core[0]) == 16

    # error paths surface as ValueError
    try:
        g.gamma_sup(data, -0.1, 0.8)
    except ValueError:
        pass
    else:
        raise AssertionError("s <= 0 must raise")

    print("smoke test: all checks passed")


if __name__ == "__main__":
    main()
