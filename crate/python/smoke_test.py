#!/usr/bin/env python3
"""Smoke test for the treeshift_py extension module.

Builds the cdylib if needed, imports it under its Python name, and
exercises the main surface: trees, shift constructors, kernel
dimensions, the equivalence deciders, kernel evaluation, and the
bounded-point-evaluation radius.

Run from the repository root:  python3 python/smoke_test.py
"""

import math
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def build_module() -> Path:
    candidates = [
        ROOT / "target" / "release" / "libtreeshift_py.so",
        ROOT / "target" / "debug" / "libtreeshift_py.so",
    ]
    built = [p for p in candidates if p.exists()]
    if not built:
        subprocess.run(
            ["cargo", "build", "-p", "treeshift-py"], cwd=ROOT, check=True
        )
        built = [p for p in candidates if p.exists()]
    return max(built, key=lambda p: p.stat().st_mtime)


def check(label: str, ok: bool, detail: str = "") -> None:
    if not ok:
        raise AssertionError(f"{label}: {detail}")
    print(f"  ok: {label}")


def main() -> int:
    so = build_module()
    staging = tempfile.mkdtemp(prefix="treeshift-py-")
    shutil.copy2(so, Path(staging) / "treeshift_py.so")
    sys.path.insert(0, staging)

    import treeshift_py as ts

    # Trees and cardinalities.
    binary = ts.Tree.uniform(6, 2, tail_period=1)
    check("binary tree repr", repr(binary) == "Tree(depth=6, vertices=127)")
    cards = binary.prefix_cards()
    check("prefix cards", cards == [2**k for k in range(7)], str(cards))
    count, cert = binary.branching_index()
    check("branching index is infinite and exact", count is None and cert == "exact")

    path = ts.Tree.path(4)
    finite, cert = path.branching_index()
    check("path has no branching vertices", finite == 0)

    # Shift constructors and moments.
    d2 = ts.Shift.dirichlet(binary, 2.0)
    b2 = ts.Shift.bergman(binary, 2.0)
    check("dirichlet c_0", math.isclose(d2.moments()[0], math.sqrt(2.0), rel_tol=1e-15))
    check("bergman c_0", math.isclose(b2.moments()[0], math.sqrt(0.5), rel_tol=1e-15))
    check(
        "kernel dimensions follow cardinalities",
        d2.kernel_dims() == [1, 1, 2, 4, 8, 16, 32],
        str(d2.kernel_dims()),
    )

    explicit = ts.Shift.explicit(path, {"1": 2.0, "2": 1.0, "3": 3.0, "4": 1.0})
    check("explicit path is balanced", explicit.is_balanced())
    check("explicit moments", explicit.moments() == [2.0, 1.0, 3.0, 1.0])

    # The operator itself: ||S e_root|| = c_0.
    e0 = [0j] * d2.dim
    e0[0] = 1 + 0j
    image = d2.apply(e0)
    norm = math.sqrt(sum(abs(x) ** 2 for x in image))
    check("apply norm", math.isclose(norm, math.sqrt(2.0), rel_tol=1e-12))
    check(
        "power moment telescopes",
        math.isclose(ts.power_moment(d2, 0, 2), math.sqrt(3.0), rel_tol=1e-12),
    )

    # Equivalence: decider and both oracles.
    same = ts.decide(d2, ts.Shift.dirichlet(binary, 2.0))
    check(
        "same spec decides equivalent exactly",
        same["verdict"] == "equivalent" and same["cert"]["kind"] == "exact",
        str(same),
    )
    diff = ts.decide(d2, b2)
    check(
        "families split at the first moment",
        diff["verdict"] == "not_equivalent" and diff["witness"]["index"] == 0,
        str(diff),
    )
    oracle = ts.joint_oracle(d2, b2)
    check("joint oracle agrees", oracle["verdict"] == "not_equivalent")

    iso_a = ts.Shift.dirichlet(ts.Tree.path(5), 1.0)
    iso_b = ts.Shift.dirichlet(ts.Tree.path(3), 1.0)
    wold = ts.wold_oracle(iso_a, iso_b)
    check("isometric rays are Wold equivalent", wold["verdict"] == "equivalent")

    try:
        ts.decide(iso_a, iso_b)
        check("decider refuses isometries", False)
    except ValueError:
        check("decider refuses isometries", True)

    # Analytic model: Hermitian kernel inside the disc, guarded outside.
    z, w = 0.31 - 0.22j, -0.12 + 0.44j
    kzw = ts.kernel_eval(b2, z, w, order=48)
    kwz = ts.kernel_eval(b2, w, z, order=48)
    hermitian = all(
        a["value"] == [b["value"][0], -b["value"][1]]
        for a, b in zip(kzw["blocks"], kwz["blocks"])
    )
    check("kernel is Hermitian", hermitian)
    check("kernel tail bound is small", kzw["tail_bound"] < 1e-10, str(kzw["tail_bound"]))
    try:
        ts.kernel_eval(b2, 1.2 + 0j, 0j)
        check("kernel_eval guards the disc", False)
    except ValueError as e:
        check("kernel_eval guards the disc", "radius" in str(e))

    # Bounded point evaluations.
    iso_bpe = ts.bpe_radius("dirichlet", 1.0)
    check(
        "isometry radius is exactly one",
        iso_bpe["radius"]["value"] == 1.0 and iso_bpe["radius"]["cert"]["kind"] == "exact",
    )
    bergman_bpe = ts.bpe_radius("bergman", 2.0, order=64)
    g = bergman_bpe["gelfand"]
    check(
        "bergman Gelfand values decrease toward one",
        all(b <= a for a, b in zip(g, g[1:])) and abs(g[-1] - 1.0) <= 0.05,
        str(g[-1]),
    )

    # Constructor guards.
    try:
        ts.Shift.dirichlet(binary, 0.5)
        check("q below one is rejected", False)
    except ValueError:
        check("q below one is rejected", True)

    print("smoke test passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
