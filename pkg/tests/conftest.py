import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from manifold_ipm.wavelets import build_family  # noqa: E402


@pytest.fixture(scope="session")
def haar():
    return build_family(1)


@pytest.fixture(scope="session")
def db2():
    return build_family(2)


@pytest.fixture(scope="session")
def db4():
    return build_family(4)


@pytest.fixture(scope="session")
def db5():
    return build_family(5)


def pytest_terminal_summary(terminalreporter):
    ran = any("test_acceptance" in r.nodeid
              for key in ("passed", "failed", "error")
              for r in terminalreporter.stats.get(key, []))
    if not ran:
        return
    from test_acceptance import CRITERIA, RESULTS

    terminalreporter.section("acceptance criteria")
    for k, title in CRITERIA.items():
        if k not in RESULTS:
            failed = any(r.nodeid.endswith(f"test_criterion_{k}")
                         for r in terminalreporter.stats.get("failed", []))
            label = "FAIL" if failed else "SKIP"
            terminalreporter.write_line(f"criterion {k:2d} {label}  {title}: no result recorded")
            continue
        ok, detail = RESULTS[k]
        terminalreporter.write_line(f"criterion {k:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}")
