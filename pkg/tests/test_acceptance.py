"""Every acceptance criterion at its stated scale and tolerance."""

import pytest

from gausskuzmin.acceptance import CRITERIA, run_criterion


@pytest.mark.parametrize("name", list(CRITERIA))
def test_criterion(name, capsys):
    res = run_criterion(name)
    with capsys.disabled():
        print("\n" + res.line())
    assert res.passed, res.line()
