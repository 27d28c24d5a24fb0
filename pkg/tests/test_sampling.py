import math
import random

import numpy as np
import pytest

from chartmorph.sampling import lttb, uniform_sample


def reference_lttb(xs, ys, k):
    """Straight transcription of the published bucket algorithm, vectorised with numpy."""
    n = len(xs)
    pts = np.column_stack([xs, ys]).astype(float)
    every = (n - 2) / (k - 2)
    out, a = [0], 0
    for i in range(k - 2):
        lo, hi = math.floor(i * every) + 1, math.floor((i + 1) * every) + 1
        nlo, nhi = math.floor((i + 1) * every) + 1, min(math.floor((i + 2) * every) + 1, n)
        avg = pts[nlo:nhi].mean(axis=0)
        cand = pts[lo:hi]
        area = np.abs((pts[a, 0] - avg[0]) * (cand[:, 1] - pts[a, 1])
                      - (pts[a, 0] - cand[:, 0]) * (avg[1] - pts[a, 1]))
        a = lo + int(np.argmax(area))
        out.append(a)
    out.append(n - 1)
    return out


@pytest.mark.parametrize("n,k,seed", [(1000, 300, 1), (500, 50, 2), (301, 300, 3), (97, 10, 4)])
def test_lttb_matches_reference(n, k, seed):
    rng = random.Random(seed)
    xs = sorted(rng.uniform(0, 100) for _ in range(n))
    ys = [rng.gauss(0, 1) for _ in range(n)]
    assert lttb(list(zip(xs, ys)), k) == reference_lttb(xs, ys, k)


def test_lttb_keeps_endpoints_and_spike():
    ys = [0.0] * 200
    ys[123] = 50.0
    idx = lttb([(i, y) for i, y in enumerate(ys)], 20)
    assert idx[0] == 0 and idx[-1] == 199 and 123 in idx
    assert len(idx) == 20 and idx == sorted(idx)


def test_lttb_short_input_untouched():
    assert lttb([(0, 0), (1, 1)], 5) == [0, 1]
    with pytest.raises(ValueError):
        lttb([(0, 0)] * 10, 1)


def test_uniform_sample_is_seeded():
    a = uniform_sample(500, 300, 42)
    assert a == uniform_sample(500, 300, 42)
    assert a != uniform_sample(500, 300, 43)
    assert len(set(a)) == 300 and a == sorted(a) and 0 <= a[0] and a[-1] < 500
    assert a == sorted(random.Random(42).sample(range(500), 300))
