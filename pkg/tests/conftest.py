from hypothesis import settings

# Exact rational arithmetic makes single examples slow but never flaky.
settings.register_profile("exact", deadline=None, max_examples=60)
settings.load_profile("exact")


def pytest_terminal_summary(terminalreporter):
    module = __import__("sys").modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
