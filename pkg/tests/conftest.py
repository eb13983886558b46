import random
from fractions import Fraction

import pytest


def random_rationals(count, lo=-2, hi=2, seed=0, max_den=64):
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        q = rng.randint(1, max_den)
        p = rng.randint(lo * q, hi * q)
        out.append(Fraction(p, q))
    return out


@pytest.fixture
def tmp_cwd(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path
