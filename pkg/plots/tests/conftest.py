import shutil
import subprocess

import pytest


def gdlab(*argv):
    exe = shutil.which("gdlab")
    if exe is None:
        pytest.skip("gdlab CLI not installed")
    subprocess.run([exe, *map(str, argv)], check=True)


@pytest.fixture(scope="session")
def fig1_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("fig1")
    gdlab("fig1", "--eta", "0.5", "--out", out)
    return out


@pytest.fixture(scope="session")
def fig1_wide_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("fig1w")
    gdlab("fig1", "--eta", "0.25", "--out", out)
    return out


@pytest.fixture(scope="session")
def bifurcation_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("bif")
    gdlab(
        "bifurcation",
        "--eta-min", "0.05", "--eta-max", "0.40", "--eta-steps", "36",
        "--kmax", "2", "--interval", "0.05", "1.6", "--grid-n", "201",
        "--out", out,
    )
    return out


@pytest.fixture(scope="session")
def arcs_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("arcs")
    gdlab("stable-minima", "--eta", "0.15", "--p", "0.5", "--out", out)
    return out


@pytest.fixture(scope="session")
def trajectory_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("traj")
    gdlab(
        "trajectory",
        "--theta0", "1.48", "0.7756756756756757",
        "--eta", "0.325", "--steps", "120",
        "--out", out,
    )
    return out
