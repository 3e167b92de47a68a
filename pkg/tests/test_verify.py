"""The named check suites should all pass at their default seed."""

import pytest

from kplane.verify import SUITE_NAMES, run_suite


@pytest.mark.parametrize("suite", ("rearrange", "lorentz", "symmetry", "drury", "flow"))
def test_suite_passes(suite):
    results = run_suite(suite, seed=0)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail}")
    assert results, "suite returned no checks"
    assert all(r.passed for r in results)


def test_suite_names():
    assert SUITE_NAMES == ("all", "rearrange", "lorentz", "symmetry", "drury", "flow")


def test_unknown_suite():
    with pytest.raises(ValueError, match="unknown suite"):
        run_suite("nosuch")


def test_all_runs_every_suite_in_order():
    results = run_suite("all", seed=0)
    names = [r.name for r in results]
    # 7 rearrange + 3 lorentz + 5 symmetry + 3 drury + 6 flow
    assert len(names) == 24
    assert len(set(names)) == 24
    prefixes = [n.split("-")[0] for n in names]
    order = []
    for p in prefixes:
        if not order or order[-1] != p:
            order.append(p)
    assert order == ["rearrange", "lorentz", "s", "inversion", "drury", "flow"]
    assert all(r.passed for r in results)
