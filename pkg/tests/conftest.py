import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mgplan.grounding import ground, load_ground_problem
from mgplan.pddl import parse_domain_file, parse_problem, parse_problem_file

BENCH = Path(__file__).parent.parent / "benchmarks"


@pytest.fixture(scope="session")
def bench_dir() -> Path:
    return BENCH


@pytest.fixture(scope="session")
def blocks_domain():
    return parse_domain_file(BENCH / "blocksworld" / "domain.pddl")


@pytest.fixture(scope="session")
def sussman(blocks_domain):
    problem = parse_problem_file(BENCH / "blocksworld" / "sussman.pddl", blocks_domain)
    return ground(blocks_domain, problem)


@pytest.fixture(scope="session")
def gripper2():
    return load_ground_problem(BENCH / "gripper" / "domain.pddl", BENCH / "gripper" / "gripper-2.pddl")


@pytest.fixture(scope="session")
def driverlog_small():
    return load_ground_problem(
        BENCH / "driverlog" / "domain.pddl", BENCH / "driverlog" / "driverlog-small.pddl"
    )


@pytest.fixture(scope="session")
def depots_small():
    return load_ground_problem(BENCH / "depots" / "domain.pddl", BENCH / "depots" / "depots-small.pddl")


def ground_blocks(domain, text: str):
    """Ground a generated blocksworld problem description."""
    return ground(domain, parse_problem(text, domain))
