"""Smoke test for the pyflasque extension.

Build it first:

    cargo build --release -p flasque-py --features extension-module

then run `python3 python/smoke_test.py`. The script loads the freshly built
shared library straight from target/.
"""

import importlib.util
import pathlib
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load():
    for profile in ("release", "debug"):
        for name in ("libpyflasque.so", "libpyflasque.dylib", "pyflasque.dll"):
            lib = ROOT / "target" / profile / name
            if lib.exists():
                spec = importlib.util.spec_from_file_location("pyflasque", lib)
                mod = importlib.util.module_from_spec(spec)
                spec.loader.exec_module(mod)
                return mod
    sys.exit("pyflasque is not built; see the docstring")


def main():
    fl = load()
    pc = fl.Poset.builtin("pseudocircle")
    assert pc.points == ["x", "y", "a", "b"], pc.points
    assert pc.le("x", "a") and not pc.le("a", "x")

    z = fl.Sheaf.builtin(pc, "const-Z")
    r = z.flabby("traditional")
    assert r["verdict"] is False
    assert sorted(r["counterexample"]["open"]) == ["a", "b"]
    assert z.cohomology(2) == {0: "Z", 1: "Z", 2: "0"}
    assert z.higher_direct_images("pseudocircle->point")[1] == {"*": "Z"}
    assert z.stalk_formula_check("pseudocircle->point") == []

    g = fl.Sheaf.builtin(pc, "godement-Z")
    assert g.is_flabby()
    assert all(v == "0" for k, v in g.cohomology().items() if k > 0)

    s2 = fl.Sheaf.builtin(fl.Poset.builtin("sphere2"), "const-Z2")
    assert s2.cohomology(3) == {0: "Z/2", 1: "0", 2: "Z/2", 3: "0"}
    env = fl.Sheaf.builtin(pc, "const-Z2").envelope()
    assert env["mono"] is True
    print("envelope of const Z/2 on the pseudocircle is flabby:", env["flabby"]["verdict"])

    fork = fl.Sheaf.builtin(fl.Poset.builtin("fork"), "const-01")
    again = fl.Sheaf.from_json(fork.to_json())
    assert again.to_json() == fork.to_json()
    for mode in ("traditional", "local", "strong", "internal"):
        assert fork.flabby(mode)["verdict"] is False, mode
    flabby = "(forall (K (P1 X)) (exists (x X) (forall (y X) (imp (in y K) (eq y x)))))"
    assert fork.eval(flabby) == {"r": False, "a": True, "b": True}

    c2 = fl.Sheaf.builtin(fl.Poset.builtin("sierpinski"), "const-Z2")
    assert c2.is_injective() and c2.internal_injective()["passed"]

    reg = fl.Presheaf.builtin("BG-Z2", "regular")
    assert reg.internal_flabby() and not reg.strongly_flabby()
    one = fl.Presheaf.builtin("BG-Z2", "terminal")
    assert one.internal_flabby() and one.strongly_flabby()

    assert len(fl.enumerate_corpus(1, 1)) == 2
    try:
        fl.enumerate_corpus(6, 2)
    except ValueError:
        pass
    else:
        raise AssertionError("bounds should be enforced")

    report = fl.run_suite(max_points=2, max_stalk=2, max_dim=1, vect_points=2)
    failed = [r for r in report["results"] if not r["passed"]]
    assert not failed, failed
    print(f"smoke test ok ({len(report['results'])} properties)")


if __name__ == "__main__":
    main()
