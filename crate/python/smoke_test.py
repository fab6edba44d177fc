"""Smoke test for the `qaop` extension module.

Uses an installed `qaop` if there is one; otherwise loads the library built by
`cargo build -p qaop-python --release`.
"""

import importlib.machinery
import importlib.util
import json
import pathlib
import sys


def load():
    try:
        import qaop

        return qaop
    except ImportError:
        pass
    root = pathlib.Path(__file__).resolve().parent.parent
    for profile in ("release", "debug"):
        for name in ("libqaop_py.so", "libqaop_py.dylib", "qaop_py.dll"):
            path = root / "target" / profile / name
            if path.exists():
                loader = importlib.machinery.ExtensionFileLoader("qaop", str(path))
                spec = importlib.util.spec_from_loader("qaop", loader)
                module = importlib.util.module_from_spec(spec)
                loader.exec_module(module)
                return module
    sys.exit("qaop extension not found; run `cargo build -p qaop-python --release` first")


def main():
    qaop = load()
    data = [[((i * 7 + j * 13) % 11) / 3.0 + i * j * 0.01 for j in range(5)] for i in range(12)]

    report, a = qaop.fit(data, k=2, s=3, lambda2=0.01)
    report = json.loads(report)
    assert report["schema"] == "qaop-report/1"
    assert len(a) == 5 and all(len(row) == 2 for row in a)

    report, _ = qaop.compare(data, k=2, s=3, seed=1)
    comparison = json.loads(report)["comparison"]
    assert comparison["agree"], comparison

    res = json.loads(qaop.resources(8, k=2, p=8))
    assert res["state_prep_qubits"] == 12, res

    try:
        qaop.fit(data, k=9)
    except RuntimeError:
        pass
    else:
        raise AssertionError("k larger than the data should fail")
    try:
        qaop.fit(data, mode="nope")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown mode should fail")

    print(f"qaop {qaop.__version__}: smoke test passed")


if __name__ == "__main__":
    main()
