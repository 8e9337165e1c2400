"""Independent brute-force references used to derive expected values.

Nothing here imports the package; each routine is the slowest obvious way to
compute the quantity so it can referee the optimized paths.
"""

from __future__ import annotations

import itertools
import math

import mpmath


def brute_max_pow_q(rows, q):
    """O(p^2 n) scan; returns (max sum |a_k - b_k|^q, i, j), ties to smallest (i, j)."""
    best = None
    for i in range(len(rows)):
        for j in range(i + 1, len(rows)):
            s = 0.0
            for a, b in zip(rows[i], rows[j]):
                s += abs(a - b) ** q
            if best is None or s > best[0]:
                best = (s, i, j)
    return best


def normal_cdf_quad(x, dps=40):
    """Phi(x) by high-precision quadrature of the normal density."""
    with mpmath.workdps(dps):
        phi = lambda u: mpmath.exp(-u * u / 2) / mpmath.sqrt(2 * mpmath.pi)  # noqa: E731
        return float(mpmath.mpf("0.5") + mpmath.quad(phi, [0, x]))


def chen_stein_enumeration(values, probs, p, n, t, q=2.0):
    """All Chen-Stein quantities by enumerating every p x n matrix.

    lambda, b1 and b2 are summed over alpha and beta in B_alpha directly,
    without using exchangeability. b3 is computed from its definition too:
    for each alpha, E|P(eta_alpha > t | eta_beta, beta outside B_alpha) - P(eta_alpha > t)|.
    """
    pairs = list(itertools.combinations(range(p), 2))
    nbhd = {a: [b for b in pairs if b != a and set(a) & set(b)] for a in pairs}
    single = {a: 0.0 for a in pairs}
    joint = {(a, b): 0.0 for a in pairs for b in nbhd[a]}
    pmax = 0.0
    outcomes = []
    for cells in itertools.product(range(len(values)), repeat=p * n):
        w = 1.0
        for c in cells:
            w *= probs[c]
        x = [[values[cells[i * n + k]] for k in range(n)] for i in range(p)]
        stat = {(i, j): sum(abs(x[i][k] - x[j][k]) ** q for k in range(n)) for i, j in pairs}
        exc = {a: stat[a] > t for a in pairs}
        outcomes.append((w, stat, exc))
        for a in pairs:
            if exc[a]:
                single[a] += w
            for b in nbhd[a]:
                if exc[a] and exc[b]:
                    joint[(a, b)] += w
        if not any(exc.values()):
            pmax += w
    lam = sum(single.values())
    b1 = sum(single[a] * single[b] for a in pairs for b in nbhd[a])
    b2 = sum(joint.values())
    b3 = 0.0
    for a in pairs:
        outside = [b for b in pairs if b != a and b not in nbhd[a]]
        groups = {}
        for w, stat, exc in outcomes:
            key = tuple(stat[b] for b in outside)
            tot, hit = groups.get(key, (0.0, 0.0))
            groups[key] = (tot + w, hit + (w if exc[a] else 0.0))
        b3 += sum(tot * abs(hit / tot - single[a]) for tot, hit in groups.values())
    bound = min(1.0, 1.0 / lam if lam > 0 else math.inf) * (b1 + b2 + b3)
    return {"lambda": lam, "b1": b1, "b2": b2, "b3": b3, "p_max_le_t": pmax, "bound": bound}


def pair_corr_monte_carlo(draw, samples):
    """Sample Corr(|X1 - X2|^2, |X1 - X3|^2) from a scalar sampler ``draw()``."""
    a, b = [], []
    for _ in range(samples):
        x1, x2, x3 = draw(), draw(), draw()
        a.append((x1 - x2) ** 2)
        b.append((x1 - x3) ** 2)
    ma, mb = sum(a) / samples, sum(b) / samples
    cov = sum((u - ma) * (v - mb) for u, v in zip(a, b)) / samples
    va = sum((u - ma) ** 2 for u in a) / samples
    vb = sum((v - mb) ** 2 for v in b) / samples
    return cov / math.sqrt(va * vb)
