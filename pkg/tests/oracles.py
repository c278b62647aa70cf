"""Brute-force reference implementations used by the test-suite."""

import math


def block_mse_loop(a, b, k):
    h, w = len(a), len(a[0])
    out = []
    for br in range(h // k):
        for bc in range(w // k):
            s = 0.0
            for r in range(br * k, br * k + k):
                for c in range(bc * k, bc * k + k):
                    s += (float(a[r][c]) - float(b[r][c])) ** 2
            out.append(s / (k * k))
    return out


def quantile_linear(values, p):
    v = sorted(values)
    pos = p * (len(v) - 1)
    lo = math.floor(pos)
    hi = min(lo + 1, len(v) - 1)
    return v[lo] + (pos - lo) * (v[hi] - v[lo])


def iqr_loop(values):
    return quantile_linear(values, 0.75) - quantile_linear(values, 0.25)


def qv_star_scan(delta, grid):
    for n in range(len(delta)):
        if all(delta[m] == 1 for m in range(n, len(delta))):
            return grid[n]
    return max(grid)


def norm(a, b):
    return math.sqrt(sum((float(x) - float(y)) ** 2 for x, y in zip(_flat(a), _flat(b))))


def _flat(a):
    for row in a:
        if hasattr(row, "__iter__"):
            yield from row
        else:
            yield row


def indicator_norms(u_hat, u, z):
    return 1 if norm(u_hat, u) <= norm(u_hat, z) else 0


def membership_norms(u_hat, u, ref):
    return 1 if norm(u_hat, ref) > norm(u_hat, u) else 0
