"""Brute-force reference implementations used as test oracles.

Deliberately naive: direct counting over samples or pairs, no shared code
with the package.
"""
import numpy as np


def accuracy(hard, truth):
    return sum(int(h == t) for h, t in zip(hard, truth)) / len(truth)


def f1(hard, truth):
    tp = sum(1 for h, t in zip(hard, truth) if h == 1 and t == 1)
    pred = sum(1 for h in hard if h == 1)
    act = sum(1 for t in truth if t == 1)
    if tp == 0:
        return 0.0
    precision, recall = tp / pred, tp / act
    return 2 * precision * recall / (precision + recall)


def auc(scores, truth):
    """Fraction of (positive, negative) pairs ranked correctly, ties count 1/2.

    Every pair is compared explicitly (broadcast over the full pair grid).
    """
    scores, truth = np.asarray(scores), np.asarray(truth)
    pos, neg = scores[truth == 1][:, None], scores[truth == 0][None, :]
    twice = 2 * int(np.sum(pos > neg)) + int(np.sum(pos == neg))
    return twice / (2 * pos.size * neg.size)


def _rate(hard, cond):
    sel = [h for h, c in zip(hard, cond) if c]
    return sum(sel) / len(sel)


def delta_sp(hard, sens):
    return abs(_rate(hard, [s == 0 for s in sens]) - _rate(hard, [s == 1 for s in sens]))


def delta_eo(hard, truth, sens):
    return abs(_rate(hard, [t == 1 and s == 0 for t, s in zip(truth, sens)])
               - _rate(hard, [t == 1 and s == 1 for t, s in zip(truth, sens)]))


def group_accuracy(hard, truth, sens):
    out = {}
    for g in range(4):
        idx = [i for i in range(len(truth)) if 2 * sens[i] + truth[i] == g]
        if idx:
            out[g] = sum(int(hard[i] == truth[i]) for i in idx) / len(idx)
    return out


def random_instance(rng, m_max=200, tie_prone=None):
    """Random metric instance with every (s, y) group present."""
    while True:
        m = int(rng.integers(4, m_max + 1))
        truth = rng.integers(0, 2, m)
        sens = rng.integers(0, 2, m)
        if len(set(zip(truth.tolist(), sens.tolist()))) == 4:
            break
    if tie_prone if tie_prone is not None else rng.random() < 0.5:
        scores = rng.integers(-3, 4, m).astype(float)
    else:
        scores = rng.normal(size=m) + truth
    return scores, truth, sens
