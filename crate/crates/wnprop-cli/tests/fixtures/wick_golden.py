"""Wick product golden file by brute-force tensor symmetrization.

Each kernel is expanded to a full symmetric tensor T[i1..in] = c_m * m!/n!,
the product A (x) B is symmetrized by summing over all n! permutations, and
the coefficient of theta^m is read back as (n!/m!) * T[sorted index].
"""
import itertools
import json
import math
import sys


def load(path):
    with open(path) as f:
        doc = json.load(f)
    d = doc["basis"]["D"]
    ker = {}
    for k in doc["kernels"]:
        for e in k["entries"]:
            ker.setdefault(k["degree"], {})[tuple(e["multi_index"])] = complex(e["re"], e["im"])
    return doc, d, ker


def counts(idx, d):
    return tuple(idx.count(j) for j in range(d))


def mfact(m):
    return math.prod(math.factorial(k) for k in m)


def tensor(ker, n, d):
    coeffs = ker.get(n, {})
    return {idx: coeffs.get(counts(idx, d), 0) * mfact(counts(idx, d)) / math.factorial(n)
            for idx in itertools.product(range(d), repeat=n)}


def main(a_path, b_path, out_path):
    doc, d, a = load(a_path)
    _, _, b = load(b_path)
    top = min(max(a), max(b))
    kernels = []
    for n in range(top + 1):
        total = {idx: 0j for idx in itertools.product(range(d), repeat=n)}
        for k in range(n + 1):
            ta, tb = tensor(a, k, d), tensor(b, n - k, d)
            for idx in total:
                s = 0j
                for p in itertools.permutations(range(n)):
                    q = tuple(idx[i] for i in p)
                    s += ta[q[:k]] * tb[q[k:]]
                total[idx] += s / math.factorial(n)
        entries = []
        seen = set()
        for idx in sorted(total):
            m = counts(idx, d)
            if m in seen:
                continue
            seen.add(m)
            c = total[tuple(sorted(idx))] * math.factorial(n) / mfact(m)
            if c != 0:
                entries.append({"multi_index": list(m), "re": c.real, "im": c.imag})
        kernels.append({"degree": n, "entries": entries})
    with open(out_path, "w") as f:
        json.dump({"basis": doc["basis"], "kernels": kernels}, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main(*sys.argv[1:4])
