"""Smoke test for the pyphysact extension module.

Build and install first, e.g. `maturin develop --release` in crates/python,
then run `python python/smoke_test.py`.
"""

import math
import random

import pyphysact as pp


def blobs(per_class=20, seed=1):
    rng = random.Random(seed)
    x, y = [], []
    for i in range(2 * per_class):
        label = i % 2 + 1
        x.append([label * 4.0 + rng.gauss(0, 0.3), rng.gauss(0, 1)])
        y.append(label)
    return x, y


def main():
    rng = random.Random(0)
    channels = [[math.sin(0.1 * (m + 1) * n) + rng.gauss(0, 0.1) for n in range(400)] for m in range(8)]
    features = pp.extract_features(channels)
    names = pp.feature_names()
    assert len(features) == len(names) == 276, (len(features), len(names))
    assert names[0] == "tds_ch1_mean"

    assert pp.accuracy([[5, 0], [0, 5]]) == 1.0
    assert abs(pp.kappa([[2, 2], [2, 2]])) < 1e-12

    x, y = blobs()
    model = pp.Pnn(x, y, 0.5)
    assert model.num_classes == 2
    assert model.predict([8.0, 0.0]) == 2
    post = model.predict_proba([4.0, 0.0])
    assert abs(sum(post) - 1.0) < 1e-12
    clone = pp.Pnn.from_json(model.to_json())
    assert clone.predict_batch(x) == model.predict_batch(x)

    report = pp.kfold_cv(x, y, k=5, seed=3)
    assert report["alpha"] == 1.0 and report["kappa"] == 1.0, report
    assert report == pp.kfold_cv(x, y, k=5, seed=3)
    mc = pp.monte_carlo(x, y, k=5, runs=3, sigma=0.5)
    assert mc["alpha_std"] == 0.0

    trace = pp.sfs(x, y, k=5, max_features=2)
    assert trace[0][0] == 0, trace
    assert pp.select_sigma(x, y) > 0

    try:
        pp.Pnn(x, y, -1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("negative sigma accepted")
    print("pyphysact smoke test passed")


if __name__ == "__main__":
    main()
