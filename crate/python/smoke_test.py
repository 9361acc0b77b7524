"""Smoke test for the nfg_py extension module.

Run after `maturin develop -m crates/py/pyproject.toml`, or after
`cargo build -p nfg-py --features extension-module`, in which case the
shared library is loaded straight from target/.
"""

import importlib.machinery
import importlib.util
import itertools
import math
import pathlib
import sys


def load():
    try:
        import nfg_py

        return nfg_py
    except ImportError:
        pass
    root = pathlib.Path(__file__).resolve().parent.parent
    for profile in ("release", "debug"):
        for name in ("libnfg_py.so", "libnfg_py.dylib", "nfg_py.dll"):
            lib = root / "target" / profile / name
            if lib.exists():
                loader = importlib.machinery.ExtensionFileLoader("nfg_py", str(lib))
                spec = importlib.util.spec_from_file_location("nfg_py", lib, loader=loader)
                module = importlib.util.module_from_spec(spec)
                loader.exec_module(module)
                return module
    sys.exit("nfg_py not found; build it first")


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def main():
    nfg = load()

    g = nfg.gen("fig3", seed=3)
    print(g)
    assert g.kind == "double-edge" and g.num_nodes == 4 and g.num_edges == 5

    again = nfg.parse(g.to_json())
    assert again.to_json() == g.to_json()
    assert g.validate()["classification"] == "strict-sense"

    z = g.partition()
    assert close(z, g.partition("enumerate"))
    assert abs(z.imag) <= 1e-9 * abs(z)

    report = g.spa()
    assert report["converged"]

    m1 = g.zbm(1)
    assert close(m1["root"], z.real)

    # Mean over all 2-covers by listing the permutations directly.
    perms = [[0, 1], [1, 0]]
    total = 0.0
    for sigma in itertools.product(perms, repeat=g.num_edges):
        total += g.cover(2, [list(p) for p in sigma]).partition().real
    mean = total / 2 ** g.num_edges
    assert close(g.zbm(2, "exhaustive")["value"][0], mean)
    assert close(g.zbm(2)["root"], math.sqrt(mean))

    tree = nfg.gen("tree(2)", seed=1)
    cond = tree.condition()
    assert cond["holds"] and abs(cond["alpha"]) < 1e-9

    near = nfg.gen("fig3", ensemble="psd-near-identity", eta=0.01, seed=0)
    assert near.condition()["holds"]
    assert all(b["holds"] for b in (near.bounds(m) for m in (1, 2)))

    series = near.loop_series()
    assert close(series["partition"][0], near.partition().real, 1e-7)

    rows, summary = nfg.experiment("cycle(3)", instances=3, m_max=2, seed=4)
    assert rows == nfg.experiment("cycle(3)", instances=3, m_max=2, seed=4)[0]
    assert rows.startswith("seed,Z,Z_star,Z_B1,Z_B2,")
    assert summary.startswith("M,count,mean,std,")

    try:
        nfg.parse("{")
    except nfg.NfgError:
        pass
    else:
        raise AssertionError("parse should fail")

    print("smoke test passed")


if __name__ == "__main__":
    main()
