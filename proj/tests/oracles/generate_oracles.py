#  Copyright 2026 The vblab Authors
#
#  Licensed under the Apache License, Version 2.0 (the "License");
#  you may not use this file except in compliance with the License.
#  You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
#  Unless required by applicable law or agreed to in writing, software
#  distributed under the License is distributed on an "AS IS" BASIS,
#  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
#  See the License for the specific language governing permissions and
#  limitations under the License.

"""Independent reference values for the C++ test suite.

Computed with mpmath at 50 digits and plain numpy, never through the C++
code. The output is committed as oracles.json; rerun only when a fixture
changes:

    python3 tests/oracles/generate_oracles.py > tests/oracles/oracles.json
"""

import json
import itertools

import mpmath as mp
import numpy as np

mp.mp.dps = 50
LN2 = mp.log(2)


def ratio(family, a=None):
    """Closed-form sup|l'| / inf|l'| on the unit interval."""
    a = mp.mpf(a) if a is not None else None
    if family == "mae":
        return mp.mpf(1)
    if family == "el":
        return mp.e
    if family == "vce":
        return (1 + a) / a
    if family == "vel":
        return a
    if family == "vsl":
        return (a + 1) * LN2 / (LN2 - mp.log(a + 1))
    raise ValueError(family)


def profile(family, u, a=0.0):
    """Single-label loss as a function of the labelled probability, no clamping."""
    u = mp.mpf(u)
    a = mp.mpf(a)
    if family == "ce":
        return -mp.log(u)
    if family == "mae":
        return 2 * (1 - u)
    if family == "el":
        return mp.exp(-u)
    if family == "sl":
        return (mp.log(u + 1) - LN2) ** 2
    if family == "vce":
        return -mp.log(u + a)
    if family == "vel":
        return a ** (-u)
    if family == "vsl":
        return (mp.log(a * u + 1) - LN2) ** 2 / a
    raise ValueError(family)


def nce(probs, y):
    return (-mp.log(probs[y])) / sum(-mp.log(p) for p in probs)


def f(x):
    return float(x)


def lattice_argmin(family, a, weights, resolution):
    n = int(round(1 / resolution))
    k = len(weights)
    best, best_point = None, None
    # compositions of n into k parts in lexicographic order of the counts
    for head in itertools.product(range(n + 1), repeat=k - 1):
        if sum(head) > n:
            continue
        counts = list(head) + [n - sum(head)]
        point = [c / n for c in counts]
        value = sum(w * float(profile(family, p, a)) for w, p in zip(weights, point) if w != 0.0)
        if best is None or value < best:
            best, best_point = value, point
    return best_point, best


def quadratic_bowl(w0, lr, momentum, steps):
    w = np.array(w0, dtype=float)
    v = np.zeros_like(w)
    norms = []
    for _ in range(steps):
        v = momentum * v + w  # gradient of 0.5 * |w|^2
        w = w - lr * v
        norms.append(float(np.linalg.norm(w)))
    return norms


def softmax(z):
    z = np.asarray(z, dtype=float)
    e = np.exp(z - z.max())
    return (e / e.sum()).tolist()


def main():
    out = {}

    out["loss_values"] = [
        {"family": "vce", "a": 0.0, "u": 0.5, "value": f(profile("vce", 0.5, 0.0))},
        {"family": "vel", "a": f(mp.e), "u": 1.0, "value": f(profile("vel", 1.0, mp.e))},
        {"family": "vsl", "a": 0.1, "u": 0.0, "value": f(profile("vsl", 0.0, 0.1))},
        {"family": "mae", "a": 0.0, "u": 1.0, "value": 0.0},
        {"family": "ce", "a": 0.0, "u": 0.3, "value": f(profile("ce", 0.3))},
        {"family": "el", "a": 0.0, "u": 0.25, "value": f(profile("el", 0.25))},
        {"family": "sl", "a": 0.0, "u": 0.6, "value": f(profile("sl", 0.6))},
    ]
    out["vce4_grad_at_0p2"] = f(-1 / mp.mpf("4.2"))

    ratios = []
    rng = np.random.default_rng(20260101)
    for family, lo, hi in (("vce", 0.05, 20.0), ("vel", 1.01, 20.0), ("vsl", 0.01, 0.95)):
        for a in rng.uniform(lo, hi, size=8).tolist():
            ratios.append({"family": family, "a": a, "ratio": f(ratio(family, a))})
    ratios.append({"family": "mae", "a": 0.0, "ratio": 1.0})
    ratios.append({"family": "el", "a": 0.0, "ratio": f(ratio("el"))})
    ratios.append({"family": "vce", "a": 4.0, "ratio": 1.25})
    ratios.append({"family": "vsl", "a": 0.1, "ratio": f(ratio("vsl", 0.1))})
    ratios.append({"family": "vel", "a": 1.5, "ratio": 1.5})
    out["variation_ratios"] = ratios

    # symmetric-noise bound: c = eta / ((1 - eta) K - 1), bound = c (v - 1)
    eta, k, v = mp.mpf("0.4"), 10, ratio("vce", 4)
    c = eta / ((1 - eta) * k - 1)
    out["bound_symmetric_vce4_k10_eta0p4"] = {"c": f(c), "bound": f(c * (v - 1))}
    # general bound with eta_{x,k} = eta / (K - 1): (1 + c/a)(v - 1)
    c2 = 1 - eta
    a2 = 1 - eta - eta / (k - 1)
    out["bound_general_vce4_k10_eta0p4"] = {"c": f(c2), "a": f(a2), "bound": f((1 + c2 / a2) * (v - 1))}
    out["bound_general_vel1p2_k5_eta0"] = {"c": 1.0, "a": 1.0, "bound": f(2 * (mp.mpf("1.2") - 1))}
    out["threshold_k10_eta0p8"] = f(mp.mpf("0.2") / (mp.mpf("0.8") / 9))
    out["threshold_k2_eta0p4"] = f(mp.mpf("0.6") / mp.mpf("0.4"))

    point, value = lattice_argmin("vce", 0.4, [0.7, 0.2, 0.1], 0.01)
    out["argmin_vce0p4_w721"] = {"point": point, "value": value}
    point, value = lattice_argmin("mae", 0.0, [0.6, 0.4, 0.0], 0.01)
    out["argmin_mae_w640"] = {"point": point, "value": value}

    # three-sample empirical risk fixture
    probs = [[0.7, 0.2, 0.1], [0.1, 0.6, 0.3], [0.25, 0.25, 0.5]]
    labels = [0, 2, 2]
    risk = {}
    for family, a in (("ce", 0.0), ("mae", 0.0), ("vce", 4.0), ("vel", 1.5), ("vsl", 0.1)):
        risk[family] = f(sum(profile(family, p[y], a) for p, y in zip(probs, labels)) / 3)
    risk["nce"] = f(sum(nce([mp.mpf(x) for x in p], y) for p, y in zip(probs, labels)) / 3)
    out["risk_fixture"] = {"probs": probs, "labels": labels, "risk": risk}

    # one linear layer: x (1x3) @ W (3x2) + b
    x = [1.0, 2.0, -1.0]
    w = [[1.0, 0.0], [0.0, 1.0], [0.5, -0.5]]
    b = [0.0, 0.25]
    logits = (np.array(x) @ np.array(w) + np.array(b)).tolist()
    out["linear_softmax"] = {"x": x, "weights": w, "bias": b, "probs": softmax(logits)}

    # 3 samples: conf 0.95 correct, 0.55 wrong, 0.65 correct, 10 bins
    out["ece_three_samples"] = f((mp.mpf("0.05") + mp.mpf("0.55") + mp.mpf("0.35")) / 3)

    out["quadratic_bowl"] = {
        "w0": [3.0, -4.0],
        "lr": 0.001,
        "momentum": 0.9,
        "norms": quadratic_bowl([3.0, -4.0], 0.001, 0.9, 100),
    }

    print(json.dumps(out, indent=2))


if __name__ == "__main__":
    main()
