#!/usr/bin/env python3
"""Write the parity-check matrices used by the benchmarks as alist files.

LDPC (p*p, k) codes are array codes: a j x p grid of p x p circulants
P^(i*l). Each block row after the first carries one redundant row, which
is dropped so that H has full rank N-K.

Polar (N, K) codes use G = F^{(x)n} with F = [[1,0],[1,1]] (no bit
reversal). Frozen positions are the N-K least reliable synthetic channels
by the Bhattacharyya recursion at a fixed design SNR; the rows of H are
the columns of G at the frozen positions.
"""
import math
import os
import sys

import numpy as np


def gf2_rank(m):
    m = m.copy() % 2
    rank = 0
    rows, cols = m.shape
    for c in range(cols):
        piv = None
        for r in range(rank, rows):
            if m[r, c]:
                piv = r
                break
        if piv is None:
            continue
        m[[rank, piv]] = m[[piv, rank]]
        for r in range(rows):
            if r != rank and m[r, c]:
                m[r] ^= m[rank]
        rank += 1
    return rank


def independent_rows(h):
    kept = []
    for r in range(h.shape[0]):
        cand = kept + [r]
        if gf2_rank(h[cand]) == len(cand):
            kept.append(r)
    return h[kept]


def array_code(p, j):
    h = np.zeros((j * p, p * p), dtype=np.uint8)
    for i in range(j):
        for l in range(p):
            shift = (i * l) % p
            for r in range(p):
                h[i * p + r, l * p + (r + shift) % p] = 1
    return independent_rows(h)


def polar_code(n_log, k, design_db=0.0):
    n = 1 << n_log
    f = np.array([[1, 0], [1, 1]], dtype=np.uint8)
    g = np.array([[1]], dtype=np.uint8)
    for _ in range(n_log):
        g = np.kron(g, f) % 2
    rate = k / n
    z0 = math.exp(-rate * 10 ** (design_db / 10))
    z = []
    for i in range(n):
        zi = z0
        for b in range(n_log - 1, -1, -1):
            if (i >> b) & 1:
                zi = zi * zi
            else:
                zi = 2 * zi - zi * zi
        z.append(zi)
    order = sorted(range(n), key=lambda i: (-z[i], i))
    frozen = sorted(order[: n - k])
    return g[:, frozen].T.copy()


def hamming74():
    return np.array(
        [
            [1, 0, 1, 0, 1, 0, 1],
            [0, 1, 1, 0, 0, 1, 1],
            [0, 0, 0, 1, 1, 1, 1],
        ],
        dtype=np.uint8,
    )


def write_alist(path, h):
    m, n = h.shape
    cols = [list(np.nonzero(h[:, v])[0] + 1) for v in range(n)]
    rows = [list(np.nonzero(h[c, :])[0] + 1) for c in range(m)]
    mv = max(len(c) for c in cols)
    mc = max(len(r) for r in rows)
    with open(path, "w") as fh:
        fh.write(f"{n} {m}\n{mv} {mc}\n")
        fh.write(" ".join(str(len(c)) for c in cols) + "\n")
        fh.write(" ".join(str(len(r)) for r in rows) + "\n")
        for c in cols:
            fh.write(" ".join(str(x) for x in c + [0] * (mv - len(c))) + "\n")
        for r in rows:
            fh.write(" ".join(str(x) for x in r + [0] * (mc - len(r))) + "\n")


def main(out):
    os.makedirs(out, exist_ok=True)
    codes = {
        "hamming_7_4": hamming74(),
        "ldpc_49_24": array_code(7, 4),
        "ldpc_121_60": array_code(11, 6),
        "ldpc_121_70": array_code(11, 5),
        "ldpc_121_80": array_code(11, 4),
        "polar_64_32": polar_code(6, 32),
        "polar_64_48": polar_code(6, 48),
        "polar_128_64": polar_code(7, 64),
        "polar_128_86": polar_code(7, 86),
        "polar_128_96": polar_code(7, 96),
    }
    for name, h in codes.items():
        m, n = h.shape
        assert gf2_rank(h) == m, name
        assert (h.sum(axis=1) >= 2).all(), name
        write_alist(os.path.join(out, name + ".alist"), h)
        print(f"{name}: n={n} m={m} k={n - m} edges={int(h.sum())}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "codes")
