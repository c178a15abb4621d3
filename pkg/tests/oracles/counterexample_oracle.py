"""Brute-force oracle for the shrinking two-bump quotient sequence.

Everything here is written directly from the definitions with plain
numpy, independent of the package: cell-centered 1D grid, tent kernel
row by row, interior elimination by np.linalg.solve, quotient as an
explicit double sum over ordered active pairs. Output is frozen into
tests/data/counterexample_golden.json; the test suite compares the
package against these numbers.

Run from the repo root:  python3 tests/oracles/counterexample_oracle.py
"""

import json
import os

import numpy as np


def quotients(h, r, R, n_list):
    # cell-centered nodes on [0, 1]
    m = int(round(1.0 / h))
    assert abs(m * h - 1.0) < 1e-12
    x = (np.arange(m) + 0.5) * h
    mu = np.full(m, h)
    bdist = np.minimum(x, 1.0 - x)
    strip = bdist <= r
    s_idx = np.flatnonzero(strip)
    i_idx = np.flatnonzero(~strip)

    # tent kernel, midpoint quadrature, zero diagonal
    cnorm = 1.0 / R**2
    dist = np.abs(x[:, None] - x[None, :])
    jmat = np.where(dist < R, cnorm * (R - dist), 0.0)
    w = jmat * mu[None, :]
    np.fill_diagonal(w, 0.0)

    # active ordered pairs: everything except strip-strip
    active = np.ones((m, m), dtype=bool)
    np.fill_diagonal(active, False)
    active[np.ix_(s_idx, s_idx)] = False
    w_act = np.where(active, w, 0.0)

    # interior rows balance against all neighbors
    deg_i = w.sum(axis=1)[i_idx]
    a_ii = np.diag(deg_i) - w[np.ix_(i_idx, i_idx)]
    w_is = w[np.ix_(i_idx, s_idx)]

    def extend(g):
        u = np.empty(m)
        u[s_idx] = g
        u[i_idx] = np.linalg.solve(a_ii, w_is @ g)
        return u

    # bump centers: outermost strip nodes (minimal wall distance),
    # lowest index first, partner as far from it as possible
    bs = bdist[s_idx]
    outer = np.flatnonzero(bs <= bs.min() + 1e-12)
    a = outer[0]
    b = outer[np.argmax(np.abs(x[s_idx][outer] - x[s_idx][a]))]
    mu_s = mu[s_idx]
    xs = x[s_idx]

    out = []
    for n in n_list:
        rad = 1.0 / n
        assert rad >= h / 2.0
        in_a = np.abs(xs - xs[a]) <= rad
        in_b = np.abs(xs - xs[b]) <= rad
        assert not np.any(in_a & in_b)
        f = in_a / np.dot(mu_s, in_a) - in_b / np.dot(mu_s, in_b)
        f = f - np.dot(mu_s, f) / mu_s.sum()
        f = f / np.sqrt(np.sum(mu_s * f**2))

        u = extend(f)
        num = 0.0
        for i in range(m):
            for j in range(m):
                if w_act[i, j] != 0.0:
                    num += 0.5 * mu[i] * w_act[i, j] * (u[j] - u[i]) ** 2
        den = float(np.sum(mu_s * f**2))
        out.append((int(n), num / den))
    return out


def main():
    cases = []
    for h in (1.0 / 64.0, 1.0 / 128.0):
        pairs = quotients(h, 0.25, 0.25, [4, 8, 16, 32])
        cases.append({
            "h": h,
            "r": 0.25,
            "R": 0.25,
            "family": "tent",
            "n": [n for n, _ in pairs],
            "quotient": [q for _, q in pairs],
        })
        print(f"h = {h:.17g}")
        for n, q in pairs:
            print(f"  n={n:3d}  quotient={q:.17g}")
        qs = [q for _, q in pairs]
        print(f"  strictly decreasing: {all(b < a for a, b in zip(qs, qs[1:]))}"
              f"   final/first = {qs[-1] / qs[0]:.6f}")

    dest = os.path.join(os.path.dirname(__file__), "..", "data",
                        "counterexample_golden.json")
    with open(dest, "w", encoding="utf-8") as fh:
        json.dump({"cases": cases}, fh, indent=2)
        fh.write("\n")
    print(f"wrote {os.path.normpath(dest)}")


if __name__ == "__main__":
    main()
