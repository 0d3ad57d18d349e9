import re
from collections import defaultdict

_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)")


def pytest_terminal_summary(terminalreporter):
    results = defaultdict(list)
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            m = _CRITERION.search(getattr(rep, "nodeid", ""))
            if m and rep.when == "call" or (m and outcome == "error"):
                results[int(m.group(1))].append((rep.nodeid.split("::")[-1], outcome))
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(results):
        failed = [name for name, o in results[k] if o != "passed"]
        status = "PASS" if not failed else "FAIL"
        detail = f" ({', '.join(failed)})" if failed else ""
        terminalreporter.write_line(f"criterion {k}: {status} [{len(results[k])} checks]{detail}")
