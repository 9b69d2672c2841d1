"""Smoke test for the pygcwssim extension module.

Build and install with `pip install --no-build-isolation -e crates/python`
(or `maturin develop -m crates/python/Cargo.toml`), then run this file.
"""

import math
import os
import tempfile

import pygcwssim as g


def main():
    cx = [1 + 0j, 1j]
    k = 0.01
    assert math.isclose(g.local_cwssim(cx, [2 * c for c in cx], K=k), (8 + k) / (10 + k), rel_tol=1e-12)

    ds = g.Dataset.synthetic(2, 24, size=32, seed=0)
    assert len(ds) == 48 and ds.labels()[:2] == [0, 0]
    img = ds.image(0)
    assert g.global_cwssim(img, img) == 1.0
    assert g.global_cwssim(img, img.shifted(2, 0)) > 0.8

    d = g.distance_matrix(ds, "gcwssim", t=3, stride=2, bridge=True)
    assert d.n == 48 and d.kind == "gcwssim"
    assert d.triangle_violation(1e-9) is None

    r = g.kmedoids(d, 2, restarts=10, seed=0)
    assert len(r.medoids) == 2 and len(r.assignments) == 48
    scores = g.evaluate(r.assignments, ds.labels())
    assert 0.0 <= scores.r_e <= 100.0

    worked = g.evaluate([0, 0, 0, 1], [0, 0, 1, 1])
    assert (worked.r_e, worked.r_t, worked.r_f) == (25.0, 50.0, 50.0)

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "m.gdm")
        d.save(path)
        back = g.DistanceMatrix.load(path)
        assert back.to_list() == d.to_list()
        pixels = g.save_heatmap(d, os.path.join(tmp, "h.png"), scale=1.0)
        assert max(pixels) == 255 and pixels[0] == 0

    try:
        g.geodesic(g.DistanceMatrix([[0, 1, 9, 9], [1, 0, 9, 9], [9, 9, 0, 1], [9, 9, 1, 0]]), t=1)
    except g.DisconnectedGraphError:
        pass
    else:
        raise AssertionError("expected DisconnectedGraphError")

    print("pygcwssim smoke test passed")


if __name__ == "__main__":
    main()
