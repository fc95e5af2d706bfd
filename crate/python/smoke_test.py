"""Smoke test for the `carleson` extension module.

Build and run:
    cargo build --release -p carleson-py --features extension-module
    cp target/release/libcarleson.so python/carleson.so   # .dylib on macOS, .pyd on Windows
    python3 python/smoke_test.py
"""

import cmath
import json
import math
import random

import carleson


def close(a, b, tol):
    return abs(a - b) <= tol * max(abs(b), 1e-300)


def main():
    rng = random.Random(7)
    n = 256
    f = [complex(rng.gauss(0, 1), rng.gauss(0, 1)) for _ in range(n)]

    for p0 in (0.5, 0.8, 1.0, 2.0):
        exact = (sum(abs(v) ** p0 for v in f) / n) ** (1 / p0)
        assert close(carleson.luxemburg_norm(f, [p0]), exact, 1e-9), p0
    assert carleson.luxemburg_norm([2.5] * n, [1.3]) == 2.5

    # mean-zero band-limited test signal
    g = [cmath.exp(2j * math.pi * 5 * k / n) + 0.5 * math.cos(2 * math.pi * 17 * k / n) for k in range(n)]
    coeffs = carleson.analyze(g)
    back = carleson.synthesize(coeffs, 8)
    err = math.sqrt(sum(abs(a - b) ** 2 for a, b in zip(back, g)) / sum(abs(b) ** 2 for b in g))
    assert err < 1e-8, err

    l2 = sum(abs(v) ** 2 for v in g) / n
    assert close(carleson.pairing(g, g).real, l2, 1e-9)
    assert carleson.hardy_norm(g, [0.9]) > 0
    assert carleson.cmo_norm(g, [1.0]) > 0

    try:
        carleson.luxemburg_norm(f[:100], [1.0])
    except ValueError:
        pass
    else:
        raise AssertionError("non-power-of-two length accepted")

    assert len(carleson.suite_names()) == 12
    report = json.loads(carleson.run_suite("luxemburg-basic", seed=3, trials=10))
    assert report["pass"] and report["rng"] == carleson.RNG_ALGORITHM
    print("smoke test passed")


if __name__ == "__main__":
    main()
