import json

import pytest

from bitrack import ConfigurationError, config_from_dict, config_hash, config_to_dict, parse_config, preset
from bitrack.config import PRESETS, preset_document


def write(tmp_path, doc):
    p = tmp_path / "c.json"
    p.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return p


@pytest.mark.parametrize("name", PRESETS)
def test_preset_file_parses_to_preset(tmp_path, name):
    assert parse_config(write(tmp_path, preset_document(name))) == preset(name)


@pytest.mark.parametrize("name", PRESETS)
def test_roundtrip(name):
    c = preset(name)
    assert config_from_dict(json.loads(json.dumps(config_to_dict(c)))) == c
    assert config_hash(config_from_dict(config_to_dict(c))) == config_hash(c)


def test_paper_values():
    c = preset("paper-crs")
    assert c.initial_state == (-30.0, -10.0, 20.0, 10.0, 15.0)
    assert c.noise.variance == pytest.approx(10.0)
    assert c.W == 50.0 and c.beta == 150.0 and c.thresholds == 0.0
    assert c.reference.kind == "summable"
    b = preset("paper-brs")
    assert b.beta == 3.0 and b.reference.amplitude == 10.0 and b.reference.frequency == 0.02


def test_empty_file(tmp_path):
    with pytest.raises(ConfigurationError, match="missing topology"):
        parse_config(write(tmp_path, ""))


def test_leader_row_edge(tmp_path):
    doc = preset_document("paper-crs")
    doc["topology"]["adjacency"][4][0] = 1
    with pytest.raises(ConfigurationError, match="leader cannot receive feedback") as ei:
        parse_config(write(tmp_path, doc))
    assert ei.value.path == "topology.adjacency"


def test_unknown_field(tmp_path):
    doc = preset_document("paper-crs")
    doc["estimator"]["gamma"] = 1
    with pytest.raises(ConfigurationError, match="estimator: unknown field"):
        parse_config(write(tmp_path, doc))


def test_no_spanning_tree(tmp_path):
    doc = preset_document("paper-crs")
    doc["topology"]["adjacency"][0] = [0, 1, 0, 0, 0]
    doc["topology"]["adjacency"][1] = [1, 0, 0, 0, 0]
    doc["topology"]["adjacency"][2] = [1, 0, 0, 0, 0]
    with pytest.raises(ConfigurationError, match="spanning-tree assumption violated"):
        parse_config(write(tmp_path, doc))


def test_brs_N_too_small(tmp_path):
    doc = preset_document("paper-brs")
    doc["controller"]["N"] = 10
    with pytest.raises(ConfigurationError, match="controller.N"):
        parse_config(write(tmp_path, doc))


@pytest.mark.parametrize(
    "mutate, path",
    [
        (lambda d: d["noise"].update(sigma=1.0), "noise"),
        (lambda d: d["reference"].update(type="zigzag"), "reference.type"),
        (lambda d: d["estimator"].update(W="big"), "estimator.W"),
        (lambda d: d.update(log_stride="hourly"), "log_stride"),
    ],
)
def test_field_paths(tmp_path, mutate, path):
    doc = preset_document("paper-crs")
    mutate(doc)
    with pytest.raises(ConfigurationError) as ei:
        parse_config(write(tmp_path, doc))
    assert ei.value.path == path


def test_hash_changes_with_content():
    a = preset("paper-crs")
    assert config_hash(a) != config_hash(a.with_overrides(seed=1))
    assert len(config_hash(a)) == 64
