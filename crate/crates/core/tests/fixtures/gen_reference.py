#!/usr/bin/env python3
"""Independent reference for the seeded generator, balance and split.

Regenerate with: python3 gen_reference.py > reference_seeds.json
"""
import json
import math

MASK = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed):
        self.state = seed & MASK

    def next_u64(self):
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        return z ^ (z >> 31)

    def next_below(self, n):
        threshold = ((1 << 64) - n) % n
        while True:
            x = self.next_u64()
            if x >= threshold:
                return x % n

    def shuffle(self, items):
        for i in range(len(items) - 1, 0, -1):
            j = self.next_below(i + 1)
            items[i], items[j] = items[j], items[i]


LABELS = [1 if i % 5 == 0 else 0 for i in range(24)]


def balance(labels, seed):
    pos = [i for i, l in enumerate(labels) if l == 1]
    neg = [i for i, l in enumerate(labels) if l == 0]
    if len(pos) == len(neg):
        return list(range(len(labels)))
    major, minor = (neg, pos) if len(neg) > len(pos) else (pos, neg)
    major = list(major)
    SplitMix64(seed).shuffle(major)
    keep = set(minor) | set(major[: len(minor)])
    return sorted(keep)


def split(n, seed, fracs=(0.70, 0.15, 0.15)):
    idx = list(range(n))
    SplitMix64(seed).shuffle(idx)
    n_train = math.floor(n * fracs[0])
    n_val = math.floor(n * fracs[1])
    return idx[:n_train], idx[n_train : n_train + n_val], idx[n_train + n_val :]


cases = []
for seed in (0, 1):
    g = SplitMix64(seed)
    train, val, test = split(len(LABELS), seed)
    cases.append(
        {
            "seed": seed,
            "splitmix64_first5": [format(g.next_u64(), "016x") for _ in range(5)],
            "balanced_indices": balance(LABELS, seed),
            "split": {"train": train, "val": val, "test": test},
        }
    )
print(json.dumps({"labels": LABELS, "fractions": [0.70, 0.15, 0.15], "cases": cases}, indent=2))
