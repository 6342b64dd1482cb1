import math

import pytest

from powergame.exceptions import SolverError
from powergame.rootfind import bisect, rightmost_root, scan_brackets


def test_bisect_sqrt2():
    root = bisect(lambda x: x * x - 2.0, 1.0, 2.0, tol=1e-12)
    assert abs(root - math.sqrt(2.0)) < 1e-11


def test_bisect_requires_sign_change():
    with pytest.raises(SolverError):
        bisect(lambda x: x * x + 1.0, 0.0, 1.0)


def test_scan_finds_single_bracket():
    brackets = scan_brackets(lambda x: x - 1.0, 1e-3, 1e3)
    assert len(brackets) == 1
    a, b = brackets[0]
    assert a <= 1.0 <= b


def test_rightmost_root_picks_last_crossing():
    # upward crossings at x = 1 and x = 100; the solver must return the latter
    fn = lambda x: (x - 1.0) * (x - 10.0) * (x - 100.0)
    root = rightmost_root(fn, 1e-2, 1e3, tol=1e-9)
    assert abs(root - 100.0) < 1e-6


def test_rightmost_root_no_crossing():
    with pytest.raises(SolverError):
        rightmost_root(lambda x: 1.0 + x, 1e-3, 1e3)
