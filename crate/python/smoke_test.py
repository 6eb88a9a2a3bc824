#!/usr/bin/env python3
"""End-to-end smoke test of the edm_py extension module.

Builds the cdylib with cargo, stages it as an importable module in a
temporary directory, and runs the generate -> solve -> refine -> evaluate
pipeline plus the file and edge-list entry points.
"""

import math
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def stage_module(tmp: Path) -> None:
    subprocess.run(
        ["cargo", "build", "--release", "-p", "edm-py"], cwd=REPO, check=True
    )
    lib = REPO / "target" / "release" / "libedm_py.so"
    shutil.copy(lib, tmp / "edm_py.so")
    sys.path.insert(0, str(tmp))


def main() -> None:
    tmpdir = tempfile.TemporaryDirectory()
    tmp = Path(tmpdir.name)
    stage_module(tmp)
    import edm_py

    # Dense noiseless instance: facial reduction recovers the configuration.
    inst = edm_py.generate(n=40, nf=0.0, radio=0.7, seed=3)
    assert inst.n == 40 and inst.r == 2
    assert 0.0 < inst.density <= 1.0
    assert inst.radio_range == 0.7 and inst.seed == 3
    sol = edm_py.solve_fr(inst)
    assert sol.algorithm == "fr" and sol.certified
    assert sol.residual <= 1e-8, sol.residual
    scores = edm_py.evaluate(inst, sol.points)
    assert scores["rmsd"] <= 1e-8, scores
    print("solve_fr: rmsd %.3e" % scores["rmsd"])

    # Noisy instance: refinement improves the facial-reduction estimate.
    noisy = edm_py.generate(n=40, nf=0.05, radio=0.7, seed=11)
    rough = edm_py.solve_fr(noisy)
    polished = edm_py.refine(noisy, rough.points)
    assert polished.algorithm == "refine"
    assert polished.rmsd is not None and rough.rmsd is not None
    assert polished.rmsd <= rough.rmsd * (1.0 + 1e-12)
    assert "refine-iters" in polished.report()
    print("refine: rmsd %.3e -> %.3e" % (rough.rmsd, polished.rmsd))

    # Sparse instance: pareto search with automatic sigma, then refinement.
    sparse = edm_py.generate(n=50, nf=0.1, radio=0.35, seed=7)
    witness = edm_py.solve_pareto(sparse, mode="max")
    assert witness.algorithm == "pareto-max"
    assert float(witness.report()["sigma"]) > 0.0
    refined = edm_py.refine(sparse, witness.points)
    assert refined.rmsd_pct_radio < witness.rmsd_pct_radio
    print(
        "solve_pareto: rmsd %.1f%%R -> %.1f%%R"
        % (witness.rmsd_pct_radio, refined.rmsd_pct_radio)
    )

    # File round trip preserves the instance.
    path = tmp / "inst.txt"
    inst.save(path)
    back = edm_py.Instance.load(path)
    assert back.n == inst.n and back.num_edges == inst.num_edges
    assert back.truth() is not None
    for (i, j, d), (bi, bj, bd) in zip(inst.edges(), back.edges()):
        assert (i, j) == (bi, bj) and math.isclose(d, bd, rel_tol=0, abs_tol=0)
    print("file round trip: %d edges" % back.num_edges)

    # Instances built from explicit edges: a unit square in the plane.
    square = edm_py.Instance.from_edges(
        4, 2, [(0, 1, 1.0), (0, 2, 2.0), (0, 3, 1.0), (1, 2, 1.0), (1, 3, 2.0), (2, 3, 1.0)]
    )
    est = edm_py.solve_fr(square)
    assert est.residual <= 1e-9
    assert square.misfit(est.points) <= 1e-9
    try:
        edm_py.evaluate(square, est.points)
    except edm_py.EdmError as e:
        assert "ground truth" in str(e)
    else:
        raise AssertionError("evaluate without truth should raise EdmError")
    print("from_edges: residual %.3e" % est.residual)

    print("smoke test passed")


if __name__ == "__main__":
    main()
