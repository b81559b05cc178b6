import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cdsp import Instance, Site

DATA_DIR = Path(__file__).parent / "data"
TINY2_FILE = (DATA_DIR / "tiny2.txt").read_text()


def make_tiny2(deadline2: float = 10.0, fleet_size: int = 1, shift_cap: float = 30.0) -> Instance:
    """Two requests: depot (0,0), site 1 at (0,3), site 2 at (4,0); 3-4-5 legs."""
    sites = (
        Site(0, 0.0, 0.0, 0.0, 30.0),
        Site(1, 0.0, 3.0, 0.0, 10.0),
        Site(2, 4.0, 0.0, 0.0, deadline2),
    )
    xy = np.array([(s.x, s.y) for s in sites])
    travel = np.hypot(*(xy[:, None, :] - xy[None, :, :]).transpose(2, 0, 1))
    return Instance(
        sites=sites,
        travel=travel,
        fleet_size=fleet_size,
        shift_cap=shift_cap,
        depot_deadline=30.0,
        label="TINY2",
    )


@pytest.fixture
def tiny2() -> Instance:
    return make_tiny2()


@pytest.fixture
def tiny2_file(tmp_path) -> Path:
    path = tmp_path / "tiny2.txt"
    path.write_text(TINY2_FILE)
    return path
