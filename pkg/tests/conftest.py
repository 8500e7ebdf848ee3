import numpy as np
import pytest

from evcalib import scenes
from evcalib.ingest import make_dataset
from evcalib.simulate import simulate_events

# criterion-2 scene: 64x64, 200 frames at 25 fps
SCENE = dict(width=64, height=64, n_frames=200, fps=25.0, amplitude=2.0, drift=2.0,
             flicker=0.4, seed=1)

_acceptance_lines = []


def record(criterion, passed, detail):
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}"
    _acceptance_lines.append(line)
    print(line)


@pytest.fixture(scope="session")
def acceptance_record():
    return record


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_acceptance_lines, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def truth_map():
    return scenes.random_map(64, 64, c_range=(0.05, 0.3), b_range=(-0.02, 0.02), seed=2)


@pytest.fixture(scope="session")
def base_video():
    return scenes.moving_texture(**SCENE)


@pytest.fixture(scope="session")
def consistent_video(base_video, truth_map):
    return scenes.snap_to_event_levels(base_video, truth_map)


@pytest.fixture(scope="session")
def consistent_dataset(consistent_video, truth_map):
    return make_dataset(simulate_events(consistent_video, truth_map), consistent_video)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
