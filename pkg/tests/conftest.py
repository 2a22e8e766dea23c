from pathlib import Path

import pytest

from walklab.calibration import calibrate_constants, load_constants, save_constants

ROOT = Path(__file__).resolve().parent.parent


@pytest.fixture(scope="session")
def constants_file(tmp_path_factory):
    """Path to the calibration constants file; regenerated if the repo copy is gone."""
    path = ROOT / "calibration.cfg"
    if not path.exists():
        path = tmp_path_factory.mktemp("calibration") / "calibration.cfg"
        save_constants(calibrate_constants(), path)
    return path


@pytest.fixture(scope="session")
def constants(constants_file):
    return load_constants(constants_file)
