import math

import numpy as np
import pytest

from msc.graph import path_graph
from msc.sim import IntegratorConfig
from msc.verify import (
    format_report,
    quadratic_roots_hurwitz,
    run_all,
    scalar_reduction_check,
    scalar_scaled_consensus,
    suite_hurwitz,
)


@pytest.mark.parametrize("a, b, c, d", [(1, 2, 3, 4), (-1, 0.5, 2, -1), (0.3, -2, -1, 0.1)])
def test_root_oracle_matches_numpy(a, b, c, d):
    roots = np.roots([1.0, complex(a, b), complex(c, d)])
    assert quadratic_roots_hurwitz(a, b, c, d) == bool(np.all(roots.real < 0))


def test_scalar_oracle_two_agents():
    # y1' = y2 - y1, y2' = y1 - y2: difference decays like exp(-2t), sum conserved
    out = scalar_scaled_consensus(path_graph(2), [1.0, 1.0], np.array([1.0, 0.0]), 0.01, 100, 100)
    diff = out[-1, 0] - out[-1, 1]
    assert diff == pytest.approx(math.exp(-2.0), rel=1e-8)
    assert out[-1].sum() == pytest.approx(1.0, abs=1e-14)


def test_scalar_reduction_with_d_equal_one():
    gap, spread = scalar_reduction_check(
        path_graph(3), [1.5, -0.7, 2.0], 1, np.array([0.2, -0.4, 0.9]), IntegratorConfig(t_end=80.0, record_every=10)
    )
    assert gap < 1e-12 and spread < 1e-8


def test_hurwitz_suite_is_seeded():
    a, b = suite_hurwitz(3, 500), suite_hurwitz(3, 500)
    assert a.total == b.total == 500 and a.failures == b.failures == []


def test_report_format_is_stable():
    results = run_all(seed=1, systems=5)
    text = format_report(1, 5, results)
    assert text == format_report(1, 5, run_all(seed=1, systems=5))
    assert text.splitlines()[0] == "msc verify: seed=1 systems=5"
    assert all(r.passed for r in results)


def test_injected_fault_fails_spectral_suite():
    results = run_all(seed=1, systems=5, inject_fault=True)
    by_name = {r.name: r for r in results}
    assert not by_name["spectral_counts"].passed
    assert len(by_name["spectral_counts"].failures) == 5
