import os

from hypothesis import HealthCheck, settings

settings.register_profile("realmod", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "realmod"))

# criterion number -> (title, passed, seconds, note); filled in by test_acceptance
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        title, ok, dt, note = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:>2} {'PASS' if ok else 'FAIL'} "
                                    f"{dt:7.1f}s  {title}" + (f"  [{note}]" if note else ""))
