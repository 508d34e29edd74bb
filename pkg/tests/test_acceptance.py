"""Exit criteria 1-14. Each test prints one PASS/FAIL line; run with -s to see them."""
import pytest

from spanset.acceptance import CHECKS

from conftest import ACCEPTANCE_LINES

pytestmark = pytest.mark.acceptance


@pytest.mark.parametrize("number", sorted(CHECKS))
def test_criterion(number):
    result = CHECKS[number]()
    print("\n" + result.line())
    ACCEPTANCE_LINES.append(result.line())
    if not result.passed:
        print(result.detail)
    assert result.passed, result.detail
