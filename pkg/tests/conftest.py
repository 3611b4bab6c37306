import pytest

from bohmex.grid import Grid1D
from bohmex.packets import GaussianPacketSpec


@pytest.fixture
def grid():
    return Grid1D(-150.0, 150.0, 1201)


@pytest.fixture
def packet():
    return GaussianPacketSpec(x0=0.0, k0=0.5, sigma_x=10.0)


@pytest.fixture
def pair_packets():
    return [GaussianPacketSpec(-40.0, 1.0, 10.0), GaussianPacketSpec(40.0, -1.0, 10.0)]


@pytest.fixture
def triple_packets(pair_packets):
    return [*pair_packets, GaussianPacketSpec(0.0, 0.3, 10.0)]


@pytest.fixture
def sample_config_dict(tmp_path):
    return {
        "scenario": "fig1_kinetic_vs_d",
        "seed": 3,
        "output_dir": str(tmp_path / "out"),
        "kinetic": {
            "distances": [0.5, 1.0, 1.5, 4.0, 5.0],
            "check_distances": [1.0],
            "sigma_x": 1.0,
            "quadrature_points": 64,
        },
    }


@pytest.fixture
def sample_config_yaml(tmp_path, sample_config_dict):
    import yaml

    config_file = tmp_path / "test_config.yaml"
    config_file.write_text(yaml.dump(sample_config_dict))
    return config_file


@pytest.fixture
def free_pair_config_dict(tmp_path):
    return {
        "scenario": "fig3_free_distinguishable",
        "seed": 5,
        "output_dir": str(tmp_path / "fig3"),
        "species": "distinguishable",
        "grid": {"x_min": -150.0, "x_max": 150.0, "n_points": 1201},
        "packets": [
            {"x0": 40.0, "energy": 0.04, "direction": -1, "sigma_x": 10.0},
            {"x0": -40.0, "energy": 0.02, "direction": 1, "sigma_x": 10.0},
        ],
        "propagation": {"dt": 0.5, "t_total": 10.0, "record_every": 5},
        "ensemble": {"members": 120, "chunk": 60},
        "export": {"snapshots": [0.0, 5.0]},
    }
