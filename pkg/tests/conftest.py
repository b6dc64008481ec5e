import math
import re

import pytest

from iclmanip.model import (
    Action,
    Episode,
    GripperState,
    JointVelocities,
    ObjectObservation,
    Pose6,
    WorkspaceBounds,
)

BOUNDS = WorkspaceBounds(-0.5, 0.5, -0.5, 0.5, 0.0, 0.5)


def velocities_with_norm(norm: float) -> JointVelocities:
    """Seven equal components whose euclidean norm is exactly `norm`."""
    return JointVelocities(tuple([norm / math.sqrt(7)] * 7))


def make_episode(norms, grips=None, instruction="push the red button"):
    """Episode whose per-step velocity norms and gripper states are given."""
    T = len(norms)
    if grips is None:
        grips = [GripperState.OPEN] * T
    objects = (ObjectObservation("red button", Pose6(0.1, 0.1, 0.0, 0, 0, 0)),)
    velocities = tuple(velocities_with_norm(n) for n in norms)
    actions = tuple(
        Action(Pose6(0.001 * t, 0.0, 0.1, 0.0, 0.0, 0.0), g) for t, g in enumerate(grips)
    )
    return Episode(instruction, objects, velocities, actions)


@pytest.fixture
def bounds():
    return BOUNDS


# One visible line per acceptance criterion, independent of output capture.
_CRITERION = re.compile(r"test_criterion_0?(\d+)")
_criterion_results = {}


def pytest_runtest_logreport(report):
    match = _CRITERION.search(report.nodeid)
    if not match:
        return
    n = int(match.group(1))
    if report.when == "call":
        _criterion_results[n] = "PASS" if report.passed else "FAIL"
    elif report.when == "setup" and report.skipped:
        _criterion_results[n] = "SKIP"
    elif not report.passed and report.when in ("setup", "teardown"):
        _criterion_results.setdefault(n, "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _criterion_results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criterion_results):
        terminalreporter.write_line(f"criterion {n}: {_criterion_results[n]}")
