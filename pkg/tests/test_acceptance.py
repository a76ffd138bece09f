"""The ten acceptance criteria at their stated tolerances; one line each in the summary."""

import pytest

from threshold_passage.acceptance import CRITERIA

from conftest import ACCEPTANCE_LINES


@pytest.mark.slow
@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    res = CRITERIA[number]()
    line = res.line()
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert res.passed, f"{line}\nmeasured: {res.measured}"
