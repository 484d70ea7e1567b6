"""Hand-transcribed belief pair from the Hallway2 illustration.

Only eight of the 92 entries are printed (1-based positions below); the rest
are shown as below 0.001. Those are filled with the same small value in both
vectors so each sums to one.
"""
import numpy as np

PRINTED = {
    2: (0.4794, 0.4795),
    19: (0.0195, 0.0196),
    69: (0.0, 0.0), 70: (0.0, 0.0), 71: (0.0, 0.0), 72: (0.0, 0.0),
    73: (0.0195, 0.0196),
    92: (0.4794, 0.4795),
}


def hallway2_near_pair():
    vs = []
    for k in range(2):
        v = np.zeros(92)
        for pos, pair in PRINTED.items():
            v[pos - 1] = pair[k]
        hidden = [i for i in range(92) if i + 1 not in PRINTED]
        v[hidden] = (1.0 - v.sum()) / len(hidden)
        vs.append(v)
    return vs[0], vs[1]
