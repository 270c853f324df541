import pytest

from rar3crack import ArchiveInfo, FixtureRecipe, build_fixture, build_header_payload, parse_archive

STD_SALT = bytes(range(8))

#: pass/fail lines recorded by the acceptance tests, echoed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def make_archive(password: str, salt: bytes = STD_SALT, payload: bytes | None = None) -> ArchiveInfo:
    if payload is None:
        payload = build_header_payload()
    data = build_fixture(FixtureRecipe(password=password, salt=salt, header_payload=payload))
    return parse_archive(data)


@pytest.fixture(scope="session")
def std_salt() -> bytes:
    return STD_SALT


@pytest.fixture(scope="session")
def abcd_archive() -> ArchiveInfo:
    return make_archive("abcd")
